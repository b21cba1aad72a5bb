//! Generators for the parametric corpus files.

use std::fmt::Write;

/// `n` voters, two candidates. S_n permutes the ballots by adjacent
/// transpositions and the winner is invariant.
pub fn voting(n: usize) -> String {
    assert!(n >= 2, "at least two voters");
    let mut s = String::new();
    let voters: Vec<String> = (1..=n).map(|i| format!("v{}", i)).collect();
    writeln!(s, "# {} voters, two candidates", n).unwrap();
    writeln!(s, "vars {{\n  var {}: int;\n  var count1, count2, b, winner: int;\n}}\n", voters.join(", ")).unwrap();
    writeln!(s, "program {{").unwrap();
    for (c, k) in [("count1", 0), ("count2", 1)] {
        for v in &voters {
            writeln!(s, "  {c} := {v} == {k} ? {c} + 1 : {c};").unwrap();
        }
    }
    writeln!(s, "  b := count1 > count2;").unwrap();
    writeln!(s, "  if b then {{ winner := 0 }} else {{ winner := 1 }}\n}}\n").unwrap();
    writeln!(s, "group S{n} = symmetric({n});").unwrap();
    writeln!(s, "group E = trivial;\n").unwrap();
    writeln!(s, "action ballots : S{n} on {} faithful {{", voters.join(", ")).unwrap();
    for i in 1..n {
        writeln!(s, "  s{i}: v{i} -> v{j}, v{j} -> v{i};", j = i + 1).unwrap();
    }
    writeln!(s, "}}\n").unwrap();
    writeln!(s, "action fixed : E on winner {{ }}\n").unwrap();
    writeln!(s, "triple ballots -> fixed by e*;").unwrap();
    s
}

/// A car driving straight for time `T`, observed under D_n: rotations by
/// 2π/n of position and heading, and reflection across the x axis.
pub fn dihedral_car(n: usize) -> String {
    assert!(n >= 3, "D_n needs n >= 3");
    let mut s = String::new();
    writeln!(s, "# straight car under D{n}").unwrap();
    writeln!(s, "vars {{\n  var x, y, v, t, b: real;\n  var theta: angle;\n  param a, T: real;\n  param dt: real01;\n}}\n")
        .unwrap();
    writeln!(
        s,
        "program {{
  t := 0;
  b := t < T;
  while b {{
    x := v * cos(theta) * dt + x;
    y := v * sin(theta) * dt + y;
    v := a * dt + v;
    t := t + dt;
    b := t < T
  }}
}}
"
    )
    .unwrap();
    writeln!(s, "group D{n} = dihedral({n});\n").unwrap();
    let q = format!("2 * pi / {n}");
    writeln!(s, "action turn : D{n} on x, y, theta faithful {{").unwrap();
    writeln!(
        s,
        "  r: x -> x * cos({q}) - y * sin({q}), y -> x * sin({q}) + y * cos({q}), theta -> theta + {q};"
    )
    .unwrap();
    writeln!(s, "  s: y -> -y, theta -> -theta;\n}}\n").unwrap();
    writeln!(s, "triple turn -> turn by eq;").unwrap();
    s
}
