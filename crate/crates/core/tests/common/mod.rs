//! Shared test support: fixture paths, a random manifest generator and a
//! brute-force reachability oracle that replays every branch combination.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pupflow::taint::{DefUseChains, UseSite};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn listing(name: &str) -> PathBuf {
    fixtures().join("listings").join(name)
}

pub fn read_listing(name: &str) -> (String, String) {
    let path = listing(name);
    let text = std::fs::read_to_string(&path).unwrap();
    (text, path.to_string_lossy().into_owned())
}

#[derive(Debug, Clone)]
pub enum GenValue {
    Literal(usize),
    Interpolated(Vec<usize>),
    Call(usize, Vec<usize>),
    Var(usize),
}

impl GenValue {
    fn vars(&self) -> BTreeSet<usize> {
        match self {
            GenValue::Literal(_) => BTreeSet::new(),
            GenValue::Interpolated(v) | GenValue::Call(_, v) => v.iter().copied().collect(),
            GenValue::Var(v) => BTreeSet::from([*v]),
        }
    }
}

#[derive(Debug, Clone)]
pub enum GenStmt {
    Assign { line: u32, var: usize, value: GenValue },
    Resource { line: u32, ordinal: usize, attrs: Vec<GenValue> },
    If { then_branch: Vec<GenStmt>, else_branch: Option<Vec<GenStmt>> },
    Case { arms: Vec<Vec<GenStmt>>, has_default: bool },
}

#[derive(Debug, Clone)]
pub struct GenParam {
    pub line: u32,
    pub var: usize,
    pub default: Option<GenValue>,
}

#[derive(Debug, Clone)]
pub struct GenProgram {
    pub params: Option<Vec<GenParam>>,
    pub body: Vec<GenStmt>,
    pub var_names: Vec<String>,
    pub literals: Vec<String>,
    pub calls: Vec<String>,
    pub text: String,
}

pub struct Vocabulary {
    pub var_names: Vec<String>,
    pub literals: Vec<String>,
    pub calls: Vec<String>,
}

impl Vocabulary {
    /// Neutral names, for reachability checks.
    pub fn plain() -> Self {
        Vocabulary {
            var_names: ["v0", "v1", "v2", "v3"].map(String::from).to_vec(),
            literals: ["a", "b", "c"].map(String::from).to_vec(),
            calls: ["join", "pick"].map(String::from).to_vec(),
        }
    }

    /// Names and values that trip the weakness rules.
    pub fn weak() -> Self {
        Vocabulary {
            var_names: [
                "db_password", "admin_user", "vip", "endpoint", "pvt_ssl_key", "port", "token",
            ]
            .map(String::from)
            .to_vec(),
            literals: ["", "admin", "0.0.0.0", "http://example.org", "https://ok", "plain", "8080"]
                .map(String::from)
                .to_vec(),
            calls: ["sha1", "md5", "join", "pick"].map(String::from).to_vec(),
        }
    }
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    budget: usize,
    vars: usize,
    literals: usize,
    calls: usize,
    ordinal: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn value(&mut self) -> GenValue {
        let pick_vars = |rng: &mut R, n: usize, k: usize| -> Vec<usize> {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            all.truncate(k);
            all
        };
        match self.rng.gen_range(0..4) {
            0 => GenValue::Literal(self.rng.gen_range(0..self.literals)),
            1 => {
                let k = self.rng.gen_range(1..=2);
                GenValue::Interpolated(pick_vars(self.rng, self.vars, k))
            }
            2 => {
                let k = self.rng.gen_range(0..=2);
                let f = self.rng.gen_range(0..self.calls);
                GenValue::Call(f, pick_vars(self.rng, self.vars, k))
            }
            _ => GenValue::Var(self.rng.gen_range(0..self.vars)),
        }
    }

    fn block(&mut self, depth: usize, max_len: usize) -> Vec<GenStmt> {
        let mut out = Vec::new();
        let len = self.rng.gen_range(0..=max_len);
        for _ in 0..len {
            if self.budget == 0 {
                break;
            }
            self.budget -= 1;
            let roll = self.rng.gen_range(0..10);
            let stmt = if roll < 2 && depth < 2 {
                let then_branch = self.block(depth + 1, 3);
                let else_branch = self.rng.gen_bool(0.6).then(|| self.block(depth + 1, 3));
                GenStmt::If { then_branch, else_branch }
            } else if roll < 3 && depth < 2 {
                let n = self.rng.gen_range(1..=3);
                let arms = (0..n).map(|_| self.block(depth + 1, 2)).collect();
                GenStmt::Case { arms, has_default: self.rng.gen_bool(0.5) }
            } else if roll < 7 {
                GenStmt::Assign { line: 0, var: self.rng.gen_range(0..self.vars), value: self.value() }
            } else {
                let n = self.rng.gen_range(1..=3);
                let attrs = (0..n).map(|_| self.value()).collect();
                let ordinal = self.ordinal;
                self.ordinal += 1;
                GenStmt::Resource { line: 0, ordinal, attrs }
            };
            out.push(stmt);
        }
        out
    }
}

/// Random manifest with at most `max_statements` statements and at most
/// two levels of branch nesting.
pub fn generate(rng: &mut impl Rng, vocab: &Vocabulary, max_statements: usize) -> GenProgram {
    let mut gen = Gen {
        rng,
        budget: max_statements,
        vars: vocab.var_names.len(),
        literals: vocab.literals.len(),
        calls: vocab.calls.len(),
        ordinal: 0,
    };
    let params = gen.rng.gen_bool(0.3).then(|| {
        let n = gen.rng.gen_range(0..=2);
        (0..n)
            .map(|_| GenParam {
                line: 0,
                var: gen.rng.gen_range(0..gen.vars),
                default: gen.rng.gen_bool(0.7).then(|| gen.value()),
            })
            .collect::<Vec<_>>()
    });
    let params = params.map(|mut ps| {
        let mut seen = BTreeSet::new();
        ps.retain(|p| seen.insert(p.var));
        ps
    });
    let body = gen.block(0, max_statements);
    let mut program = GenProgram {
        params,
        body,
        var_names: vocab.var_names.clone(),
        literals: vocab.literals.clone(),
        calls: vocab.calls.clone(),
        text: String::new(),
    };
    emit(&mut program);
    program
}

fn value_text(p: &GenProgram, v: &GenValue) -> String {
    match v {
        GenValue::Literal(i) => format!("'{}'", p.literals[*i]),
        GenValue::Interpolated(vars) => {
            let body: Vec<String> = vars.iter().map(|v| format!("${{{}}}", p.var_names[*v])).collect();
            format!("\"{}\"", body.join("-"))
        }
        GenValue::Call(f, vars) => {
            let args: Vec<String> = vars.iter().map(|v| format!("${}", p.var_names[*v])).collect();
            format!("{}({})", p.calls[*f], args.join(", "))
        }
        GenValue::Var(v) => format!("${}", p.var_names[*v]),
    }
}

struct Emitter {
    lines: Vec<String>,
    cond: usize,
}

impl Emitter {
    fn push(&mut self, line: String) -> u32 {
        self.lines.push(line);
        self.lines.len() as u32
    }
}

fn emit_block(p: &GenProgram, stmts: &mut [GenStmt], out: &mut Emitter) {
    for stmt in stmts {
        match stmt {
            GenStmt::Assign { line, var, value } => {
                *line = out.push(format!("${} = {}", p.var_names[*var], value_text(p, value)));
            }
            GenStmt::Resource { line, ordinal, attrs } => {
                let body: Vec<String> = attrs
                    .iter()
                    .enumerate()
                    .map(|(i, v)| format!("a{i} => {}", value_text(p, v)))
                    .collect();
                *line = out.push(format!("svc {{ 'r{ordinal}': {} }}", body.join(", ")));
            }
            GenStmt::If { then_branch, else_branch } => {
                out.cond += 1;
                out.push(format!("if $cond{} {{", out.cond));
                emit_block(p, then_branch, out);
                if let Some(else_branch) = else_branch {
                    out.push("} else {".into());
                    emit_block(p, else_branch, out);
                }
                out.push("}".into());
            }
            GenStmt::Case { arms, has_default } => {
                out.cond += 1;
                out.push(format!("case $sel{} {{", out.cond));
                let n = arms.len();
                for (i, arm) in arms.iter_mut().enumerate() {
                    if *has_default && i + 1 == n {
                        out.push("default: {".into());
                    } else {
                        out.push(format!("'k{i}': {{"));
                    }
                    emit_block(p, arm, out);
                    out.push("}".into());
                }
                out.push("}".into());
            }
        }
    }
}

fn emit(p: &mut GenProgram) {
    let mut out = Emitter { lines: Vec::new(), cond: 0 };
    let mut body = std::mem::take(&mut p.body);
    let mut params = p.params.take();
    if let Some(params) = &mut params {
        out.push("class generated (".into());
        for param in params.iter_mut() {
            let text = match &param.default {
                Some(v) => format!("  ${} = {},", p.var_names[param.var], value_text(p, v)),
                None => format!("  ${},", p.var_names[param.var]),
            };
            param.line = out.push(text);
        }
        out.push(") {".into());
    }
    emit_block(p, &mut body, &mut out);
    if params.is_some() {
        out.push("}".into());
    }
    p.body = body;
    p.params = params;
    p.text = out.lines.join("\n") + "\n";
}

/// A use site identified by line: a definition's right-hand side, or an
/// attribute `a<i>` of the resource on that line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SiteKey {
    Def(u32),
    Attr(u32, String),
}

type Env = BTreeMap<usize, u32>;

/// Every (definition line, use site) pair such that some combination of
/// branch choices executes the definition and then the use with no
/// redefinition in between.
pub fn oracle_pairs(p: &GenProgram) -> BTreeSet<(u32, SiteKey)> {
    fn use_value(env: &Env, value: &GenValue, site: &SiteKey, out: &mut BTreeSet<(u32, SiteKey)>) {
        for v in value.vars() {
            if let Some(&def) = env.get(&v) {
                out.insert((def, site.clone()));
            }
        }
    }

    fn run(stmts: &[GenStmt], envs: BTreeSet<Env>, out: &mut BTreeSet<(u32, SiteKey)>) -> BTreeSet<Env> {
        let mut envs = envs;
        for stmt in stmts {
            let mut next = BTreeSet::new();
            for env in envs {
                match stmt {
                    GenStmt::Assign { line, var, value } => {
                        use_value(&env, value, &SiteKey::Def(*line), out);
                        let mut env = env;
                        env.insert(*var, *line);
                        next.insert(env);
                    }
                    GenStmt::Resource { line, attrs, .. } => {
                        for (i, a) in attrs.iter().enumerate() {
                            use_value(&env, a, &SiteKey::Attr(*line, format!("a{i}")), out);
                        }
                        next.insert(env);
                    }
                    GenStmt::If { then_branch, else_branch } => {
                        next.extend(run(then_branch, BTreeSet::from([env.clone()]), out));
                        match else_branch {
                            Some(e) => next.extend(run(e, BTreeSet::from([env]), out)),
                            None => {
                                next.insert(env);
                            }
                        }
                    }
                    GenStmt::Case { arms, has_default } => {
                        for arm in arms {
                            next.extend(run(arm, BTreeSet::from([env.clone()]), out));
                        }
                        if !has_default {
                            next.insert(env);
                        }
                    }
                }
            }
            envs = next;
        }
        envs
    }

    let mut out = BTreeSet::new();
    let mut env = Env::new();
    for param in p.params.iter().flatten() {
        if let Some(default) = &param.default {
            use_value(&env, default, &SiteKey::Def(param.line), &mut out);
        }
        env.insert(param.var, param.line);
    }
    run(&p.body, BTreeSet::from([env]), &mut out);
    out
}

/// Definition line and defined variable.
pub type GenDef = (u32, usize);
/// Use site and the variables it reads.
pub type GenUse = (SiteKey, BTreeSet<usize>);

pub fn defs_and_sites(p: &GenProgram) -> (Vec<GenDef>, Vec<GenUse>) {
    fn walk(stmts: &[GenStmt], defs: &mut Vec<GenDef>, sites: &mut Vec<GenUse>) {
        for stmt in stmts {
            match stmt {
                GenStmt::Assign { line, var, value } => {
                    defs.push((*line, *var));
                    sites.push((SiteKey::Def(*line), value.vars()));
                }
                GenStmt::Resource { line, attrs, .. } => {
                    for (i, a) in attrs.iter().enumerate() {
                        sites.push((SiteKey::Attr(*line, format!("a{i}")), a.vars()));
                    }
                }
                GenStmt::If { then_branch, else_branch } => {
                    walk(then_branch, defs, sites);
                    if let Some(e) = else_branch {
                        walk(e, defs, sites);
                    }
                }
                GenStmt::Case { arms, .. } => arms.iter().for_each(|a| walk(a, defs, sites)),
            }
        }
    }
    let mut defs = Vec::new();
    let mut sites = Vec::new();
    for param in p.params.iter().flatten() {
        defs.push((param.line, param.var));
        sites.push((
            SiteKey::Def(param.line),
            param.default.as_ref().map(GenValue::vars).unwrap_or_default(),
        ));
    }
    walk(&p.body, &mut defs, &mut sites);
    (defs, sites)
}

/// Compares the analysis with the oracle on every (definition, use) pair
/// where the use reads the defined variable. Returns the number of pairs
/// checked, or a description of the first disagreement.
pub fn check_reaches(p: &GenProgram) -> Result<usize, String> {
    let manifest = pupflow::parse_manifest(&p.text, "gen.pp")
        .map_err(|e| format!("generated manifest does not parse: {e}\n{}", p.text))?;
    let chains = DefUseChains::compute(&manifest);
    let def_by_line: BTreeMap<u32, usize> = chains.defs.iter().map(|d| (d.location.line, d.id)).collect();
    let site_of = |key: &SiteKey| -> Option<UseSite> {
        match key {
            SiteKey::Def(line) => def_by_line.get(line).map(|&d| UseSite::Definition(d)),
            SiteKey::Attr(line, name) => chains
                .attribute_locations
                .keys()
                .find(|a| a.attribute_name == *name && chains.attribute_locations[*a].line == *line)
                .map(|a| UseSite::Attribute(a.clone())),
        }
    };
    let expected = oracle_pairs(p);
    let (defs, sites) = defs_and_sites(p);
    let mut checked = 0;
    for (def_line, var) in &defs {
        let def = *def_by_line
            .get(def_line)
            .ok_or_else(|| format!("no definition on line {def_line}\n{}", p.text))?;
        for (key, reads) in &sites {
            if !reads.contains(var) {
                continue;
            }
            let site = site_of(key).ok_or_else(|| format!("no site for {key:?}\n{}", p.text))?;
            let got = chains.reaches(def, &site);
            let want = expected.contains(&(*def_line, key.clone()));
            if got != want {
                return Err(format!(
                    "line {def_line} -> {key:?}: analysis {got}, oracle {want}\n{}",
                    p.text
                ));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
