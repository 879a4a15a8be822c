mod common;

use std::sync::Arc;

use common::{fixtures, generate, Vocabulary};
use proptest::prelude::*;
use pupflow::frontend::{
    Attribute, Definition, Expr, ExprKind, Manifest, SourceLocation, Statement, StatementKind,
    StringPart,
};
use pupflow::parse_manifest;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn for_each_location(m: &mut Manifest, f: &mut impl FnMut(&mut SourceLocation)) {
    fn expr(e: &mut Expr, f: &mut impl FnMut(&mut SourceLocation)) {
        f(&mut e.location);
        match &mut e.kind {
            ExprKind::Interpolated(parts) => {
                for part in parts {
                    match part {
                        StringPart::Literal(_) => {}
                        StringPart::Var { location, .. } => f(location),
                        StringPart::Expr(inner) => expr(inner, f),
                    }
                }
            }
            ExprKind::Call { args, .. } | ExprKind::Array(args) => args.iter_mut().for_each(|a| expr(a, f)),
            ExprKind::Hash(entries) => pairs(entries, f),
            ExprKind::Selector { scrutinee, arms } => {
                expr(scrutinee, f);
                pairs(arms, f);
            }
            ExprKind::Access { base, keys } => {
                expr(base, f);
                keys.iter_mut().for_each(|k| expr(k, f));
            }
            ExprKind::Binary { lhs, rhs, .. } => {
                expr(lhs, f);
                expr(rhs, f);
            }
            ExprKind::Unary { operand, .. } => expr(operand, f),
            _ => {}
        }
    }
    fn pairs(list: &mut [(Expr, Expr)], f: &mut impl FnMut(&mut SourceLocation)) {
        for (k, v) in list {
            expr(k, f);
            expr(v, f);
        }
    }
    fn attrs(list: &mut [Attribute], f: &mut impl FnMut(&mut SourceLocation)) {
        for a in list {
            f(&mut a.location);
            expr(&mut a.value, f);
        }
    }
    fn definition(d: &mut Definition, f: &mut impl FnMut(&mut SourceLocation)) {
        for p in &mut d.parameters {
            f(&mut p.location);
            if let Some(t) = &mut p.type_annotation {
                expr(t, f);
            }
            if let Some(v) = &mut p.default {
                expr(v, f);
            }
        }
        block(&mut d.body, f);
    }
    fn block(stmts: &mut [Statement], f: &mut impl FnMut(&mut SourceLocation)) {
        for s in stmts {
            f(&mut s.location);
            match &mut s.kind {
                StatementKind::Assignment { value, .. } => expr(value, f),
                StatementKind::ResourceDecl(d) => {
                    expr(&mut d.title, f);
                    attrs(&mut d.attributes, f);
                }
                StatementKind::ResourceOverride(o) => {
                    expr(&mut o.title, f);
                    attrs(&mut o.attributes, f);
                }
                StatementKind::ResourceDefaults { attributes, .. } => attrs(attributes, f),
                StatementKind::ClassDef(d) | StatementKind::DefinedTypeDef(d) => definition(d, f),
                StatementKind::If(i) => {
                    expr(&mut i.condition, f);
                    block(&mut i.then_branch, f);
                    if let Some(e) = &mut i.else_branch {
                        block(e, f);
                    }
                }
                StatementKind::Case(c) => {
                    expr(&mut c.scrutinee, f);
                    for arm in &mut c.arms {
                        arm.matches.iter_mut().for_each(|m| expr(m, f));
                        block(&mut arm.body, f);
                    }
                }
                StatementKind::Expr(e) => expr(e, f),
            }
        }
    }
    block(&mut m.statements, f);
}

/// The AST with every location replaced by one fixed location and the
/// source text dropped.
fn shape(mut m: Manifest) -> Manifest {
    let fixed = SourceLocation::new(Arc::from("x"), 1, 1);
    for_each_location(&mut m, &mut |l| *l = fixed.clone());
    m.path = Arc::from("x");
    m.raw_text.clear();
    m
}

fn print_attrs(out: &mut String, attrs: &[Attribute], indent: &str) {
    for a in attrs {
        out.push_str(&format!("{indent}  {} => {},\n", a.name, a.value.to_source()));
    }
}

fn print_block(out: &mut String, stmts: &[Statement], indent: &str) {
    let inner = format!("{indent}  ");
    for s in stmts {
        match &s.kind {
            StatementKind::Assignment { var, value } => {
                out.push_str(&format!("{indent}${var} = {}\n", value.to_source()));
            }
            StatementKind::ResourceDecl(d) => {
                out.push_str(&format!("{indent}{} {{ {}:\n", d.type_name, d.title.to_source()));
                print_attrs(out, &d.attributes, indent);
                out.push_str(&format!("{indent}}}\n"));
            }
            StatementKind::ResourceOverride(o) => {
                out.push_str(&format!("{indent}{}[{}] {{\n", o.type_ref, o.title.to_source()));
                print_attrs(out, &o.attributes, indent);
                out.push_str(&format!("{indent}}}\n"));
            }
            StatementKind::ResourceDefaults { type_name, attributes } => {
                out.push_str(&format!("{indent}{type_name} {{\n"));
                print_attrs(out, attributes, indent);
                out.push_str(&format!("{indent}}}\n"));
            }
            StatementKind::ClassDef(d) | StatementKind::DefinedTypeDef(d) => {
                let keyword = if matches!(s.kind, StatementKind::ClassDef(_)) { "class" } else { "define" };
                out.push_str(&format!("{indent}{keyword} {} (\n", d.name));
                for p in &d.parameters {
                    out.push_str(&inner);
                    if let Some(t) = &p.type_annotation {
                        out.push_str(&format!("{} ", t.to_source()));
                    }
                    out.push_str(&format!("${}", p.name));
                    if let Some(v) = &p.default {
                        out.push_str(&format!(" = {}", v.to_source()));
                    }
                    out.push_str(",\n");
                }
                out.push_str(&format!("{indent})"));
                if let Some(parent) = &d.parent {
                    out.push_str(&format!(" inherits {parent}"));
                }
                out.push_str(" {\n");
                print_block(out, &d.body, &inner);
                out.push_str(&format!("{indent}}}\n"));
            }
            StatementKind::If(i) => {
                out.push_str(&format!("{indent}if {} {{\n", i.condition.to_source()));
                print_block(out, &i.then_branch, &inner);
                if let Some(e) = &i.else_branch {
                    out.push_str(&format!("{indent}}} else {{\n"));
                    print_block(out, e, &inner);
                }
                out.push_str(&format!("{indent}}}\n"));
            }
            StatementKind::Case(c) => {
                out.push_str(&format!("{indent}case {} {{\n", c.scrutinee.to_source()));
                for arm in &c.arms {
                    let matches: Vec<String> = arm.matches.iter().map(Expr::to_source).collect();
                    out.push_str(&format!("{inner}{}: {{\n", matches.join(", ")));
                    print_block(out, &arm.body, &format!("{inner}  "));
                    out.push_str(&format!("{inner}}}\n"));
                }
                out.push_str(&format!("{indent}}}\n"));
            }
            StatementKind::Expr(e) => out.push_str(&format!("{indent}{}\n", e.to_source())),
        }
    }
}

fn print(m: &Manifest) -> String {
    let mut out = String::new();
    print_block(&mut out, &m.statements, "");
    out
}

fn assert_reparses(text: &str, origin: &str) {
    let first = parse_manifest(text, origin).unwrap();
    let printed = print(&first);
    let second = parse_manifest(&printed, origin)
        .unwrap_or_else(|e| panic!("{origin}: printed form does not parse: {e}\n{printed}"));
    assert_eq!(shape(first), shape(second), "{origin}\n{printed}");
}

fn fixture_files() -> Vec<std::path::PathBuf> {
    let mut files = Vec::new();
    for dir in ["listings", "corpus"] {
        for entry in std::fs::read_dir(fixtures().join(dir)).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "pp") {
                files.push(path);
            }
        }
    }
    files.sort();
    files
}

#[test]
fn fixtures_reparse_to_the_same_tree() {
    let files = fixture_files();
    assert!(files.len() >= 30);
    for path in files {
        let text = std::fs::read_to_string(&path).unwrap();
        assert_reparses(&text, &path.to_string_lossy());
    }
}

fn assert_locations_inside(text: &str, m: &mut Manifest) {
    let lines: Vec<&str> = text.split('\n').collect();
    for_each_location(m, &mut |l| {
        let line = lines.get(l.line as usize - 1).unwrap_or_else(|| panic!("line {} past end", l.line));
        assert!(l.column as usize <= line.chars().count() + 1, "{l} outside line {line:?}");
    });
}

#[test]
fn fixture_locations_are_inside_the_text() {
    for path in fixture_files() {
        let text = std::fs::read_to_string(&path).unwrap();
        let mut m = parse_manifest(&text, "f.pp").unwrap();
        assert_locations_inside(&text, &mut m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn arbitrary_text_never_panics(text in "(?s).{0,200}") {
        let first = parse_manifest(&text, "any.pp");
        prop_assert_eq!(&first, &parse_manifest(&text, "any.pp"));
        match first {
            Ok(mut m) => assert_locations_inside(&text, &mut m),
            Err(e) => prop_assert!(e.location().line as usize <= text.split('\n').count()),
        }
    }

    #[test]
    fn puppet_like_text_never_panics(
        tokens in proptest::collection::vec(
            prop_oneof![
                Just("$a"), Just("="), Just("'s'"), Just("\"x${a}y\""), Just("{"), Just("}"),
                Just("("), Just(")"), Just("["), Just("]"), Just(","), Just(":"), Just("=>"),
                Just("if"), Just("else"), Just("case"), Just("default"), Just("class"),
                Just("define"), Just("svc"), Just("File"), Just("?"), Just("undef"), Just("\n"),
                Just("join"), Just("1"), Just("true"), Just("#c\n"), Just("/*"), Just("*/"),
            ],
            0..40,
        )
    ) {
        let text = tokens.join(" ");
        let first = parse_manifest(&text, "any.pp");
        prop_assert_eq!(&first, &parse_manifest(&text, "any.pp"));
        if let Ok(mut m) = first {
            assert_locations_inside(&text, &mut m);
        }
    }

    #[test]
    fn generated_manifests_reparse(seed in any::<u64>()) {
        let program = generate(&mut ChaCha8Rng::seed_from_u64(seed), &Vocabulary::weak(), 12);
        assert_reparses(&program.text, "gen.pp");
        let mut m = parse_manifest(&program.text, "gen.pp").unwrap();
        assert_locations_inside(&program.text, &mut m);
    }
}
