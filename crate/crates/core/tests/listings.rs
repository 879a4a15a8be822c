mod common;

use common::read_listing;
use pupflow::harness::ManifestAnalysis;
use pupflow::rules::{detect_candidates, WeaknessCategory};
use pupflow::syntax::{classify_expressions, collect_function_calls};
use pupflow::taint::{reaches, DefUseChains, UseSite};
use pupflow::{analyze_source, parse_manifest, PatternSet, ScanMode};

fn analyze(name: &str, mode: ScanMode) -> ManifestAnalysis {
    let (text, path) = read_listing(name);
    analyze_source(&text, &path, mode, &PatternSet::default()).unwrap()
}

fn sink_of(f: &pupflow::Finding) -> (String, String) {
    let sink = f.sink.as_ref().expect("taint findings carry a sink");
    (sink.resource_type.clone(), sink.attribute.clone())
}

fn path_labels(f: &pupflow::Finding) -> Vec<&str> {
    f.path.iter().map(|s| s.label.as_str()).collect()
}

#[test]
fn htpasswd_hash_reaches_file_line() {
    let a = analyze("fig1a_htpasswd.pp", ScanMode::Taint);
    assert_eq!(a.findings.len(), 1);
    let f = &a.findings[0];
    assert_eq!(f.category, WeaknessCategory::WeakCryptoAlgorithm);
    assert_eq!(sink_of(f), ("file_line".into(), "line".into()));
}

#[test]
fn unused_token_hash_is_only_a_candidate() {
    assert!(analyze("fig1b_token.pp", ScanMode::Taint).findings.is_empty());
    let pattern = analyze("fig1b_token.pp", ScanMode::Pattern);
    assert!(!pattern.findings.is_empty());
    assert!(pattern.findings.iter().all(|f| f.sink.is_none()));
}

#[test]
fn figure_pair_counts_per_mode() {
    let total = |mode| {
        analyze("fig1a_htpasswd.pp", mode).findings.len() + analyze("fig1b_token.pp", mode).findings.len()
    };
    assert_eq!(total(ScanMode::Taint), 1);
    assert_eq!(total(ScanMode::Pattern), 2);
}

fn url_reached_by_first_def(name: &str) -> bool {
    let (text, path) = read_listing(name);
    let manifest = parse_manifest(&text, &path).unwrap();
    let chains = DefUseChains::compute(&manifest);
    let first = chains.defs.iter().find(|d| d.var == "magnum_proto").unwrap();
    let url = chains
        .attribute_locations
        .keys()
        .find(|a| a.attribute_name == "url")
        .cloned()
        .unwrap();
    let site = UseSite::Attribute(url);
    let via_chains = chains.reaches(first.id, &site);
    assert_eq!(via_chains, reaches(&manifest, "magnum_proto", &first.location, &site));
    via_chains
}

#[test]
fn reachability_rows() {
    assert!(url_reached_by_first_def("table3_row1.pp"));
    assert!(!url_reached_by_first_def("table3_row2.pp"));
}

#[test]
fn killed_definition_yields_no_finding() {
    assert_eq!(analyze("table3_row1.pp", ScanMode::Taint).findings.len(), 1);
    assert!(analyze("table3_row2.pp", ScanMode::Taint).findings.is_empty());
    assert_eq!(analyze("table3_row2.pp", ScanMode::Pattern).findings.len(), 1);
}

#[test]
fn slack_username_secret() {
    let a = analyze("listing1_slack.pp", ScanMode::Taint);
    assert!(a.findings.iter().any(|f| f.category == WeaknessCategory::HardCodedSecret
        && sink_of(f).0 == "icinga::slack_contact"));
}

#[test]
fn magnum_attributes_over_http() {
    let a = analyze("listing2_magnum.pp", ScanMode::Taint);
    assert!(!a.findings.is_empty());
    for f in &a.findings {
        assert_eq!(f.category, WeaknessCategory::HttpWithoutTls);
        assert_eq!(sink_of(f).0, "magnum");
        assert!(!path_labels(f).contains(&"$magnum_url"));
    }
    let attrs: Vec<String> = a.findings.iter().map(|f| sink_of(f).1).collect();
    assert_eq!(attrs, ["auth_uri", "auth_url"]);
}

#[test]
fn jenkins_empty_password_through_join() {
    let a = analyze("listing3_jenkins.pp", ScanMode::Taint);
    let f = a
        .findings
        .iter()
        .find(|f| f.category == WeaknessCategory::EmptyPassword)
        .expect("empty password finding");
    assert_eq!(sink_of(f), ("exec".into(), "command".into()));
    assert_eq!(
        path_labels(f),
        ["EmptyPassword $jenkins_management_password", "$security_opt_params", "exec[jenkins_auth_config].command"]
    );
}

#[test]
fn gerrit_database_password() {
    let a = analyze("listing4_gerrit_mysql.pp", ScanMode::Taint);
    assert!(a.findings.iter().any(|f| f.category == WeaknessCategory::EmptyPassword
        && sink_of(f) == ("mysql::db".into(), "password".into())));
}

#[test]
fn nagios_hash_into_override_content() {
    let a = analyze("listing5_nagios.pp", ScanMode::Taint);
    assert!(a.findings.iter().any(|f| f.category == WeaknessCategory::WeakCryptoAlgorithm
        && sink_of(f) == ("File".into(), "content".into())));
}

#[test]
fn haproxy_vip_has_two_sinks() {
    let a = analyze("listing6_haproxy.pp", ScanMode::Taint);
    let binds: Vec<_> = a
        .findings
        .iter()
        .filter(|f| f.category == WeaknessCategory::InvalidIpBinding)
        .collect();
    assert_eq!(binds.len(), 2);
    assert_eq!(binds[0].weakness_location, binds[1].weakness_location);
    let titles: Vec<&str> = binds.iter().map(|f| f.sink.as_ref().unwrap().resource_title.as_str()).collect();
    assert_eq!(titles, ["api", "discovery"]);
    assert_eq!(pupflow::report::sink_counts_per_weakness(&a.findings), [2]);
}

#[test]
fn dashboard_password_through_three_intermediates() {
    let a = analyze("listing7_onos-dashboard.pp", ScanMode::Taint);
    let f = a
        .findings
        .iter()
        .find(|f| f.category == WeaknessCategory::HardCodedSecret)
        .expect("hard-coded secret finding");
    assert_eq!(sink_of(f), ("exec".into(), "command".into()));
    assert_eq!(
        path_labels(f),
        [
            "HardCodedSecret $password",
            "$dashboard_desc",
            "$json_hash",
            "$json_message",
            "exec[create_dashboard_link].command"
        ]
    );
}

#[test]
fn undef_and_pick_are_not_secrets() {
    for src in ["$db_admin_password = undef\n", "$admin_password = pick($::admin_password, 'x')\n"] {
        let m = parse_manifest(src, "guard.pp").unwrap();
        let candidates = detect_candidates(
            &classify_expressions(&m),
            &collect_function_calls(&m),
            &PatternSet::default(),
        );
        assert!(
            candidates.iter().all(|c| c.category != WeaknessCategory::HardCodedSecret),
            "{src}: {candidates:?}"
        );
    }
}
