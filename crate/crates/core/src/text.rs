//! Line-oriented text format for circuits.
//!
//! ```text
//! QUBITS data=6 ancilla=2 alpha=0.9
//! A 2.584962500721156 q1
//! B 3 q6 c0 c2
//! Z 4 q0 c3!
//! H q5
//! X q0
//! CNOT c5! q0
//! MEASURE a0,a1
//! ```
//!
//! `q<i>`/`c<i>` are global qubit indices, `a<i>` is the `i`-th ancilla and a
//! trailing `!` marks an open control. A gate may end with `eps=<delta>` to
//! carry its own synthesis budget. When `alpha` is too close to 1 to survive
//! a decimal round trip the header carries `alpha=exp(<ln alpha>)` instead.
//! Blank lines and lines starting with `#` are ignored on import.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::circuit::{Circuit, Element};
use crate::error::{Error, Result};
use crate::gate::{Base, Control, Gate, Polarity, RotationKind};
use crate::scalar::Real;

pub fn export<T: Real>(circuit: &Circuit<T>) -> String {
    let mut out = String::new();
    let base = circuit.base();
    let alpha = if base.alpha_is_exact() {
        format!("{}", base.alpha())
    } else {
        format!("exp({})", base.ln())
    };
    let _ = writeln!(
        out,
        "QUBITS data={} ancilla={} alpha={}",
        circuit.data_qubits(),
        circuit.ancilla_qubits(),
        alpha
    );
    for el in circuit.elements() {
        match el {
            Element::Gate(g) => {
                out.push_str(&gate_line(g));
                out.push('\n');
            }
            Element::Measure(list) => {
                let names: Vec<String> = list
                    .iter()
                    .map(|q| format!("a{}", q.saturating_sub(circuit.data_qubits())))
                    .collect();
                if names.is_empty() {
                    out.push_str("MEASURE\n");
                } else {
                    let _ = writeln!(out, "MEASURE {}", names.join(","));
                }
            }
        }
    }
    out
}

fn control_token(c: &Control) -> String {
    match c.polarity {
        Polarity::Closed => format!("c{}", c.qubit),
        Polarity::Open => format!("c{}!", c.qubit),
    }
}

fn gate_line<T: Real>(g: &Gate<T>) -> String {
    let controls: Vec<String> = g.controls.iter().map(control_token).collect();
    let mut line = match g.kind {
        RotationKind::A(m) => format!("A {m} q{}", g.target),
        RotationKind::B(m) => format!("B {m} q{}", g.target),
        RotationKind::Z(m) => format!("Z {m} q{}", g.target),
        RotationKind::Hadamard => format!("H q{}", g.target),
        RotationKind::PauliX => format!("X q{}", g.target),
        RotationKind::Cnot => {
            // control precedes target for CNOT
            let mut s = String::from("CNOT");
            for c in &controls {
                s.push(' ');
                s.push_str(c);
            }
            let _ = write!(s, " q{}", g.target);
            s
        }
    };
    if !matches!(g.kind, RotationKind::Cnot) {
        for c in &controls {
            line.push(' ');
            line.push_str(c);
        }
    }
    if let Some(eps) = g.synthesis_error {
        let _ = write!(line, " eps={eps}");
    }
    line
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num<T: FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("invalid {what} `{s}`")))
}

fn parse_prefixed(line: usize, tok: &str, prefix: char) -> Result<usize> {
    tok.strip_prefix(prefix)
        .ok_or_else(|| parse_err(line, format!("expected `{prefix}<index>`, found `{tok}`")))
        .and_then(|rest| parse_num(line, rest, "qubit index"))
}

fn parse_control(line: usize, tok: &str) -> Result<Control> {
    let (body, polarity) = match tok.strip_suffix('!') {
        Some(b) => (b, Polarity::Open),
        None => (tok, Polarity::Closed),
    };
    Ok(Control { qubit: parse_prefixed(line, body, 'c')?, polarity })
}

fn parse_header<T: Real>(line: usize, text: &str) -> Result<(usize, usize, Base<T>)> {
    let mut toks = text.split_whitespace();
    if toks.next() != Some("QUBITS") {
        return Err(parse_err(line, "expected `QUBITS data=<n> ancilla=<a> alpha=<alpha>` header"));
    }
    let mut field = |key: &str| -> Result<&str> {
        let tok = toks.next().ok_or_else(|| parse_err(line, format!("missing `{key}=`")))?;
        tok.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| parse_err(line, format!("expected `{key}=`, found `{tok}`")))
    };
    let data = parse_num(line, field("data")?, "data count")?;
    let ancilla = parse_num(line, field("ancilla")?, "ancilla count")?;
    let alpha = field("alpha")?;
    let base = match alpha.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
        Some(ln) => Base::from_ln(parse_num(line, ln, "ln alpha")?),
        None => Base::from_alpha(parse_num(line, alpha, "alpha")?),
    };
    if toks.next().is_some() {
        return Err(parse_err(line, "trailing fields in header"));
    }
    Ok((data, ancilla, base))
}

fn parse_gate<T: Real>(line: usize, text: &str) -> Result<Gate<T>> {
    let mut toks: Vec<&str> = text.split_whitespace().collect();
    let mut synthesis_error = None;
    if let Some(last) = toks.last() {
        if let Some(eps) = last.strip_prefix("eps=") {
            synthesis_error = Some(parse_num(line, eps, "eps")?);
            toks.pop();
        }
    }
    let Some(&op) = toks.first() else {
        return Err(parse_err(line, "missing element name"));
    };
    let rest = &toks[1..];
    let need = |n: usize| -> Result<()> {
        if rest.len() < n {
            Err(parse_err(line, format!("`{op}` needs at least {n} operands")))
        } else {
            Ok(())
        }
    };
    let mut gate = match op {
        "A" | "B" | "Z" => {
            need(2)?;
            let m: T = parse_num(line, rest[0], "exponent")?;
            let kind = match op {
                "A" => RotationKind::A(m),
                "B" => RotationKind::B(m),
                _ => RotationKind::Z(m),
            };
            let target = parse_prefixed(line, rest[1], 'q')?;
            let controls =
                rest[2..].iter().map(|t| parse_control(line, t)).collect::<Result<Vec<_>>>()?;
            Gate::controlled(kind, target, controls)
        }
        "H" | "X" => {
            need(1)?;
            if rest.len() != 1 {
                return Err(parse_err(line, format!("`{op}` takes exactly one target")));
            }
            let kind = if op == "H" { RotationKind::Hadamard } else { RotationKind::PauliX };
            Gate::new(kind, parse_prefixed(line, rest[0], 'q')?)
        }
        "CNOT" => {
            if rest.len() != 2 {
                return Err(parse_err(line, "`CNOT` takes `c<j>[!] q<t>`"));
            }
            Gate::cnot(parse_control(line, rest[0])?, parse_prefixed(line, rest[1], 'q')?)
        }
        other => return Err(parse_err(line, format!("unknown element `{other}`"))),
    };
    gate.synthesis_error = synthesis_error;
    Ok(gate)
}

pub fn import<T: Real>(text: &str) -> Result<Circuit<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let (data, ancilla, base) = parse_header(hline, header)?;
    let mut circuit = Circuit::new(data, ancilla, base);
    for (n, l) in lines {
        if let Some(rest) = l.strip_prefix("MEASURE") {
            if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
                return Err(parse_err(n, format!("unknown element `{l}`")));
            }
            let list = rest
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| parse_prefixed(n, t, 'a').map(|i| data + i))
                .collect::<Result<Vec<_>>>()?;
            circuit.measure(list);
        } else {
            circuit.push(parse_gate(n, l)?);
        }
    }
    Ok(circuit)
}
