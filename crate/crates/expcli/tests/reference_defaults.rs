//! Every experiment's defaults reproduce the checked-in reference table.

use gcl_expcli::{parse_config, Experiment};
use toml::{Table, Value};

fn lookup(v: &Value, path: &str) -> Option<f64> {
    let mut node = v;
    for part in path.split('.') {
        node = node.get(part)?;
    }
    node.as_float().or_else(|| node.as_integer().map(|i| i as f64))
}

#[test]
fn defaults_match_reference_table() {
    let text = include_str!("../data/reference_parameters.toml");
    let table: Table = text.parse().unwrap();
    assert_eq!(table.len(), Experiment::ALL.len());
    for exp in Experiment::ALL {
        let expected = table.get(exp.name()).and_then(Value::as_table).unwrap_or_else(|| panic!("{exp} missing"));
        let cfg = parse_config(&format!("experiment = \"{exp}\"\n"), &[]).unwrap();
        let resolved = Value::try_from(&cfg).unwrap();
        for (key, want) in expected {
            let want = want.as_float().unwrap();
            let got = lookup(&resolved, key).unwrap_or_else(|| panic!("{exp}: {key} not resolved"));
            assert_eq!(got, want, "{exp}: {key}");
        }
    }
}

#[test]
fn quantum_defaults_compare_both_families() {
    for exp in Experiment::ALL {
        let cfg = parse_config(&format!("experiment = \"{exp}\"\n"), &[]).unwrap();
        let labels: Vec<&str> = cfg.families.iter().map(|f| f.label()).collect();
        assert_eq!(labels, ["CL", "gCL"], "{exp}");
    }
}
