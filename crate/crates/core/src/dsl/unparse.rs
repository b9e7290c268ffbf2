//! Renders a program back to source text that re-parses to an equal program.

use std::fmt::Write as _;

use crate::ir::{
    format_number, Action, Continuation, Distribution, Program, Rate, ResetAtom, ResetLaw, VarId,
    VarKind,
};

pub fn unparse(p: &Program) -> String {
    let names = p.namer();
    let mut out = String::new();
    let declared: Vec<_> = p
        .variables
        .iter()
        .filter(|v| v.kind != VarKind::Time)
        .collect();
    if !declared.is_empty() {
        out.push_str("vars {\n");
        for v in declared {
            let int = if v.integer { "int " } else { "" };
            let _ = writeln!(out, "    {int}{} = {};", v.name, format_number(v.init));
        }
        out.push_str("}\n\n");
    }
    for d in &p.definitions {
        let _ = write!(out, "{} :-", d.name);
        for (i, b) in d.branches.iter().enumerate() {
            let sep = if i == 0 { " " } else { "\n    + " };
            let cont = match &b.continuation {
                Continuation::Agent(a) => a.as_str(),
                Continuation::Null => "0",
            };
            let _ = write!(out, "{sep}{}.{cont}", action_text(&b.action, &names));
        }
        out.push_str(";\n");
    }
    if !p.definitions.is_empty() {
        out.push('\n');
    }
    let agents: Vec<&str> = p.network.iter().map(|e| e.agent.as_str()).collect();
    let _ = writeln!(out, "network {};", agents.join(" || "));
    out
}

/// `[guard -> resets]{rate}`
pub fn action_text(a: &Action, names: &dyn Fn(VarId) -> String) -> String {
    let resets: Vec<String> = a.reset.iter().map(|r| reset_text(r, names)).collect();
    let rate = match &a.rate {
        Rate::Infinite => "inf".to_string(),
        Rate::Finite(e) => e.display_with(names).to_string(),
    };
    format!(
        "[{} -> {}]{{{rate}}}",
        a.guard.display_with(names),
        resets.join(", ")
    )
}

pub fn reset_text(r: &ResetAtom, names: &dyn Fn(VarId) -> String) -> String {
    let t = names(r.target);
    match &r.law {
        ResetLaw::Increment(k) if *k < 0.0 => format!("{t}' = {t} - {}", format_number(-k)),
        ResetLaw::Increment(k) => format!("{t}' = {t} + {}", format_number(*k)),
        ResetLaw::Assign(e) => format!("{t}' = {}", e.display_with(names)),
        ResetLaw::Random(d) => {
            let args: Vec<String> = d
                .params()
                .iter()
                .map(|e| e.display_with(names).to_string())
                .collect();
            let name = match d {
                Distribution::Uniform(..) => "Unif",
                Distribution::Exponential(..) => "Exp",
                Distribution::Normal(..) => "Normal",
            };
            format!("{t}' = {name}({})", args.join(", "))
        }
    }
}
