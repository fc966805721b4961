use std::fmt::Write;

use crate::expr::format_number;
use crate::model::{BioPepaSystem, LocationKind, ModelComponent, SyncSet};

/// Prints a system in the concrete syntax accepted by [`super::parse`].
///
/// Every section header is always emitted, so an empty system becomes a
/// document of six headers. The model component is written as one
/// definition named `System`.
pub fn serialize(system: &BioPepaSystem) -> String {
    let mut out = String::new();

    out.push_str("[locations]\n");
    for loc in &system.locations {
        let kind = match loc.kind {
            LocationKind::Compartment => "C",
            LocationKind::Membrane => "M",
        };
        let unit = if loc.unit.is_empty() { String::new() } else { format!(" {}", loc.unit) };
        let _ = writeln!(out, "{} : {}{unit}, {kind};", loc.name, format_number(loc.size));
    }

    out.push_str("\n[parameters]\n");
    for (name, value) in &system.parameters {
        let _ = writeln!(out, "{name} = {};", format_number(*value));
    }

    out.push_str("\n[rates]\n");
    for (action, rate) in &system.rates {
        let _ = writeln!(out, "{action} = {};", rate.expr);
    }

    out.push_str("\n[species]\n");
    for comp in &system.components {
        let terms: Vec<String> = comp
            .prefixes
            .iter()
            .map(|p| {
                let head = if p.stoichiometry == 1 {
                    p.action.clone()
                } else {
                    format!("({}, {})", p.action, p.stoichiometry)
                };
                format!("{head} {} {}", p.role.symbol(), comp.subject)
            })
            .collect();
        let _ = writeln!(out, "{} = {};", comp.subject, terms.join(" + "));
    }

    out.push_str("\n[info]\n");
    for info in &system.species_info {
        let _ = write!(out, "{} : step = {}", info.subject, format_number(info.step_size));
        if let Some(max) = info.max_amount {
            let _ = write!(out, ", max = {}", format_number(max));
        }
        out.push_str(";\n");
    }

    out.push_str("\n[model]\n");
    if let Some(model) = &system.model {
        let mut body = String::new();
        write_model(model, &mut body, false);
        let _ = writeln!(out, "System = {body};");
    }
    out
}

fn write_model(m: &ModelComponent, out: &mut String, nested: bool) {
    match m {
        ModelComponent::Instance { subject, initial, .. } => {
            let _ = write!(out, "{subject}[{}]", format_number(*initial));
        }
        ModelComponent::Cooperation { left, sync, right } => {
            if nested {
                out.push('(');
            }
            write_model(left, out, false);
            match sync {
                SyncSet::Star => out.push_str(" <*> "),
                SyncSet::Actions(set) => {
                    let names: Vec<&str> = set.iter().map(String::as_str).collect();
                    let _ = write!(out, " <{}> ", names.join(", "));
                }
            }
            write_model(right, out, true);
            if nested {
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn empty_system_has_headers_only() {
        let text = serialize(&BioPepaSystem::default());
        let headers: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        assert_eq!(headers, ["[locations]", "[parameters]", "[rates]", "[species]", "[info]", "[model]"]);
        assert_eq!(parse(&text).unwrap(), BioPepaSystem::default());
    }

    #[test]
    fn unit_stoichiometry_is_elided() {
        let sys = parse("[species] X@c = a << X@c + (b, 3) >> X@c;").unwrap();
        let text = serialize(&sys);
        assert!(text.contains("X@c = a << X@c + (b, 3) >> X@c;"), "{text}");
    }

    #[test]
    fn nested_cooperation_round_trips() {
        let src = "[locations] c : 2.5 uL, C; m : 1, M;\n[parameters] k = -0.5; e = 1e-12;\n\
                   [rates] a = k * X@c / (1 + Y@m ^ -2); b = -(3);\n\
                   [species] X@c = a << X@c; Y@m = a (+) Y@m + b (.) Y@m; Z@c = b (-) Z@c;\n\
                   [info] X@c : step = 10, max = 100; Y@m : step = 1;\n\
                   [model] M = X@c[1] <a> (Y@m[2.5] <> Z@c[0]);";
        let sys = parse(src).unwrap();
        assert_eq!(parse(&serialize(&sys)).unwrap(), sys);
    }
}
