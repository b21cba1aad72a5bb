//! External solver process: script over stdin, answers over stdout.

use super::emit::{emit_script, get_value_command, symbol};
use super::{Obligation, SolverConfig, SolverResult};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

/// Locates the solver: explicit path, then `SYMVERIF_SOLVER`, then `z3` on
/// `PATH`.
pub fn locate_solver(explicit: Option<&PathBuf>) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.clone());
    }
    if let Ok(p) = std::env::var("SYMVERIF_SOLVER") {
        if !p.is_empty() {
            return Some(PathBuf::from(p));
        }
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join("z3")).find(|p| p.is_file())
}

/// Default arguments for reading SMT-LIB from stdin.
pub fn default_args(solver: &std::path::Path) -> Vec<String> {
    let name = solver.file_name().and_then(|n| n.to_str()).unwrap_or("");
    if name.starts_with("cvc") {
        vec!["--lang=smt2".into(), "--produce-models".into(), "--incremental".into()]
    } else {
        vec!["-in".into(), "-smt2".into()]
    }
}

enum Line {
    Text(String),
    Closed,
}

/// Reads one S-expression answer (possibly spanning lines).
fn read_answer(rx: &mpsc::Receiver<Line>, deadline: Instant) -> Result<Option<String>, ()> {
    let mut buf = String::new();
    let mut depth: i64 = 0;
    loop {
        let left = deadline.saturating_duration_since(Instant::now());
        match rx.recv_timeout(left) {
            Ok(Line::Text(l)) => {
                let l = l.trim();
                if l.is_empty() && buf.is_empty() {
                    continue;
                }
                for c in l.chars() {
                    match c {
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        _ => {}
                    }
                }
                if !buf.is_empty() {
                    buf.push(' ');
                }
                buf.push_str(l);
                if depth <= 0 {
                    return Ok(Some(buf));
                }
            }
            Ok(Line::Closed) => return Ok(if buf.is_empty() { None } else { Some(buf) }),
            Err(mpsc::RecvTimeoutError::Timeout) => return Err(()),
            Err(mpsc::RecvTimeoutError::Disconnected) => return Ok(None),
        }
    }
}

/// Runs one obligation. The script is sent up to `(check-sat)`; values are
/// requested only after a `sat` answer.
pub fn run_solver(ob: &Obligation, cfg: &SolverConfig) -> SolverResult {
    let script = emit_script(ob, cfg.trig_axioms);
    if let Some(dir) = &cfg.keep_dir {
        let _ = std::fs::create_dir_all(dir);
        let _ = std::fs::write(dir.join(format!("{}.smt2", ob.file_stem())), &script);
    }
    let Some(path) = locate_solver(cfg.path.as_ref()) else {
        return SolverResult::SolverError("no SMT solver found (use --solver or SYMVERIF_SOLVER)".into());
    };
    let args = if cfg.args.is_empty() { default_args(&path) } else { cfg.args.clone() };
    let mut child = match Command::new(&path)
        .args(&args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return SolverResult::SolverError(format!("cannot start {}: {}", path.display(), e)),
    };
    let stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    let reader = std::thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            match line {
                Ok(l) => {
                    if tx.send(Line::Text(l)).is_err() {
                        return;
                    }
                }
                Err(_) => break,
            }
        }
        let _ = tx.send(Line::Closed);
    });
    let mut stdin = child.stdin.take().expect("piped stdin");
    let deadline = Instant::now() + cfg.timeout;
    let result = (|| {
        if stdin.write_all(script.as_bytes()).and_then(|_| stdin.flush()).is_err() {
            return SolverResult::SolverError("solver closed its input".into());
        }
        let answer = match read_answer(&rx, deadline) {
            Err(()) => return SolverResult::Timeout,
            Ok(None) => return SolverResult::SolverError("solver produced no answer".into()),
            Ok(Some(a)) => a,
        };
        match answer.as_str() {
            "unsat" => SolverResult::Valid,
            "unknown" => SolverResult::Unknown("solver returned unknown".into()),
            "sat" => {
                let Some(cmd) = get_value_command(ob) else {
                    return SolverResult::CounterModel(BTreeMap::new());
                };
                if writeln!(stdin, "{}", cmd).and_then(|_| stdin.flush()).is_err() {
                    return SolverResult::SolverError("solver closed its input".into());
                }
                match read_answer(&rx, deadline) {
                    Err(()) => SolverResult::Timeout,
                    Ok(None) => SolverResult::SolverError("no model returned".into()),
                    Ok(Some(text)) => match parse_model(&text, ob) {
                        Ok(m) => SolverResult::CounterModel(m),
                        Err(e) => SolverResult::SolverError(e),
                    },
                }
            }
            other => SolverResult::SolverError(other.to_string()),
        }
    })();
    let _ = writeln!(stdin, "(exit)");
    drop(stdin);
    // Give the solver a moment to exit on its own before killing it.
    let grace = Instant::now() + Duration::from_millis(200);
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if Instant::now() < grace && !matches!(result, SolverResult::Timeout) => {
                std::thread::sleep(Duration::from_millis(2))
            }
            _ => {
                let _ = child.kill();
                let _ = child.wait();
                break;
            }
        }
    }
    let _ = reader.join();
    result
}

#[derive(Debug, Clone, PartialEq)]
enum Sx {
    Atom(String),
    List(Vec<Sx>),
}

fn parse_sx(text: &str) -> Result<Sx, String> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in text.chars() {
        if quoted {
            cur.push(c);
            if c == '|' {
                quoted = false;
            }
            continue;
        }
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(c.to_string());
            }
            '|' => {
                cur.push(c);
                quoted = true;
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    let mut pos = 0;
    let sx = parse_tokens(&toks, &mut pos)?;
    Ok(sx)
}

fn parse_tokens(toks: &[String], pos: &mut usize) -> Result<Sx, String> {
    let t = toks.get(*pos).ok_or("unexpected end of solver output")?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut items = Vec::new();
            while toks.get(*pos).map(|s| s.as_str()) != Some(")") {
                if *pos >= toks.len() {
                    return Err("unbalanced solver output".into());
                }
                items.push(parse_tokens(toks, pos)?);
            }
            *pos += 1;
            Ok(Sx::List(items))
        }
        ")" => Err("unexpected `)` in solver output".into()),
        a => Ok(Sx::Atom(a.to_string())),
    }
}

fn decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() || !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{}{}", int, frac).parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits, den))
}

fn value(sx: &Sx) -> Result<BigRational, String> {
    match sx {
        Sx::Atom(a) => decimal(a).ok_or_else(|| format!("unparseable model value `{}`", a)),
        Sx::List(items) => match items.as_slice() {
            [Sx::Atom(op), x] if op == "-" => Ok(-value(x)?),
            [Sx::Atom(op), x, y] if op == "/" => {
                let d = value(y)?;
                if d == BigRational::from_integer(0.into()) {
                    return Err("division by zero in model value".into());
                }
                Ok(value(x)? / d)
            }
            _ => Err(format!("non-rational model value {:?}", sx)),
        },
    }
}

fn parse_model(text: &str, ob: &Obligation) -> Result<BTreeMap<String, BigRational>, String> {
    if text.starts_with("(error") {
        return Err(text.to_string());
    }
    let Sx::List(pairs) = parse_sx(text)? else { return Err(format!("unexpected model `{}`", text)) };
    let by_symbol: BTreeMap<String, &str> = ob.universals.iter().map(|u| (symbol(&u.name), u.name.as_str())).collect();
    let mut out = BTreeMap::new();
    for p in pairs {
        match p {
            Sx::List(kv) if kv.len() == 2 => {
                let Sx::Atom(k) = &kv[0] else { return Err("malformed model entry".into()) };
                let name = by_symbol.get(k).copied().unwrap_or(k.as_str());
                out.insert(name.to_string(), value(&kv[1])?);
            }
            _ => return Err("malformed model entry".into()),
        }
    }
    Ok(out)
}
