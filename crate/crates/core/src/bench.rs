//! Parameterized Train-Gate-Controller family.

use std::fmt::Write as _;

/// Benchmark family and size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkParams {
    pub n: usize,
}

fn prefix(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("t{}_", i + 1)
    }
}

/// TGC(n): a controller and `n` trains. Train `i` enters the tunnel with
/// `<p>1`, leaves with `<p>2` (both shared with the controller) and returns
/// to waiting with the private `<p>3`, where `<p>` is `a`, `b`, ... The
/// formula states mutual exclusion in the tunnel for the controller.
/// Returns `None` for `n = 0`.
pub fn generate_benchmark(params: BenchmarkParams) -> Option<String> {
    let n = params.n;
    if n == 0 {
        return None;
    }
    let mut s = String::new();
    let _ = writeln!(s, "% Train-Gate-Controller with {n} train(s).");
    s.push_str("AGENT Controller:\n  INIT: G\n");
    for i in 0..n {
        let _ = writeln!(s, "  G -> R : {}1", prefix(i));
    }
    for i in 0..n {
        let _ = writeln!(s, "  R -> G : {}2", prefix(i));
    }
    for i in 0..n {
        let p = prefix(i);
        let k = i + 1;
        let _ = writeln!(s, "AGENT Train{k}:\n  INIT: W");
        let _ = writeln!(s, "  W -> T : {p}1 SET in{k}=true");
        let _ = writeln!(s, "  T -> A : {p}2 SET in{k}=false");
        let _ = writeln!(s, "  A -> W : {p}3");
    }
    let props: Vec<String> = (1..=n).map(|k| format!("in{k}")).collect();
    let _ = writeln!(s, "PROPOSITIONS: {}", props.join(", "));
    let mut clauses = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            clauses.push(format!("!(in{i} & in{j})"));
        }
    }
    let body = if clauses.is_empty() {
        "true".to_string()
    } else {
        clauses.join(" & ")
    };
    let _ = writeln!(s, "FORMULA: <<Controller>> G {body}");
    Some(s)
}
