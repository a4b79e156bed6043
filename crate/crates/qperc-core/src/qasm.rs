//! OpenQASM 2.0 export and a parser for the exported subset.
//!
//! Export decomposes everything into {h, x, cx, u1, cu1}; swaps are emitted as
//! three CNOTs. Angles are printed as shortest round-trip decimals, so the
//! parser recovers them bit-exactly. The parser also accepts `pi` expressions
//! (`pi/2`, `-pi`, `3*pi/4`) for hand-written files.

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate, GateKind, RegisterLayout};
use crate::error::{Error, Result};

pub fn export_qasm(c: &Circuit) -> String {
    let d = c.decomposed();
    let n = d.layout().total_qubits();
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    for (name, qs) in c.layout().registers() {
        let _ = writeln!(out, "// register {name}: qubits {qs:?}");
    }
    let _ = writeln!(out, "qreg q[{n}];");
    for g in d.gates() {
        match g.kind {
            GateKind::H => {
                let _ = writeln!(out, "h q[{}];", g.targets[0]);
            }
            GateKind::X => {
                let _ = writeln!(out, "x q[{}];", g.targets[0]);
            }
            GateKind::Cnot => {
                let _ = writeln!(out, "cx q[{}],q[{}];", g.controls[0], g.targets[0]);
            }
            GateKind::CPhase(theta) => {
                let _ = writeln!(
                    out,
                    "cu1({theta}) q[{}],q[{}];",
                    g.controls[0], g.targets[0]
                );
            }
            GateKind::MCPhase(theta) => {
                // decomposed() leaves only control-free phases
                let _ = writeln!(out, "u1({theta}) q[{}];", g.targets[0]);
            }
            GateKind::Swap | GateKind::Mcx => unreachable!("removed by decomposition"),
        }
    }
    out
}

fn parse_angle(expr: &str, line: usize) -> Result<f64> {
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let err = |msg: &str| Error::Parse {
        line,
        msg: format!("{msg}: {expr:?}"),
    };
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.as_str()),
    };
    // forms: <float>, pi, <float>*pi, pi/<float>, <float>*pi/<float>
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let num_val = if num == "pi" {
        std::f64::consts::PI
    } else if let Some(k) = num.strip_suffix("*pi") {
        k.parse::<f64>().map_err(|_| err("bad angle factor"))? * std::f64::consts::PI
    } else {
        num.parse::<f64>().map_err(|_| err("bad angle"))?
    };
    let den_val = match den {
        Some(d) => d.parse::<f64>().map_err(|_| err("bad angle divisor"))?,
        None => 1.0,
    };
    Ok(sign * num_val / den_val)
}

fn parse_qubit(tok: &str, line: usize) -> Result<usize> {
    let tok = tok.trim();
    let inner = tok
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected q[i], got {tok:?}"),
        })?;
    inner.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad qubit index {inner:?}"),
    })
}

/// Parse the exported subset back into a circuit over one register `q`.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = match raw.split_once("//") {
            Some((head, _)) => head,
            None => raw,
        };
        for stmt in stripped.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() || stmt.starts_with("OPENQASM") || stmt.starts_with("include") {
                continue;
            }
            if let Some(rest) = stmt.strip_prefix("qreg") {
                let n = rest
                    .trim()
                    .strip_prefix("q[")
                    .and_then(|r| r.strip_suffix(']'))
                    .and_then(|r| r.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("bad qreg declaration {stmt:?}"),
                    })?;
                if circuit.is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "multiple qreg declarations".into(),
                    });
                }
                circuit = Some(Circuit::new(RegisterLayout::contiguous(&[("q", n)])?));
                continue;
            }
            let c = circuit.as_mut().ok_or_else(|| Error::Parse {
                line,
                msg: "gate before qreg declaration".into(),
            })?;
            let (head, args) = match stmt.find(' ') {
                Some(i) => stmt.split_at(i),
                None => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("malformed statement {stmt:?}"),
                    })
                }
            };
            let qubits: Vec<&str> = args.trim().split(',').collect();
            let gate = if head == "h" || head == "x" {
                let q = parse_qubit(qubits[0], line)?;
                if head == "h" {
                    Gate::h(q)
                } else {
                    Gate::x(q)
                }
            } else if head == "cx" {
                if qubits.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        msg: "cx expects two qubits".into(),
                    });
                }
                Gate::cnot(parse_qubit(qubits[0], line)?, parse_qubit(qubits[1], line)?)
            } else if head == "swap" {
                if qubits.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        msg: "swap expects two qubits".into(),
                    });
                }
                Gate::swap(parse_qubit(qubits[0], line)?, parse_qubit(qubits[1], line)?)
            } else if let Some(expr) = head.strip_prefix("cu1(").and_then(|r| r.strip_suffix(')')) {
                if qubits.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        msg: "cu1 expects two qubits".into(),
                    });
                }
                Gate::cphase(
                    parse_angle(expr, line)?,
                    parse_qubit(qubits[0], line)?,
                    parse_qubit(qubits[1], line)?,
                )
            } else if let Some(expr) = head.strip_prefix("u1(").and_then(|r| r.strip_suffix(')')) {
                Gate::phase(parse_angle(expr, line)?, parse_qubit(qubits[0], line)?)
            } else {
                return Err(Error::Parse {
                    line,
                    msg: format!("unsupported gate {head:?}"),
                });
            };
            c.push(gate)?;
        }
    }
    circuit.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "no qreg declaration found".into(),
    })
}
