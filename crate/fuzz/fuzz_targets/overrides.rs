#![no_main]

use hyperstab_cli::overrides::{apply, parse_override};
use hyperstab_cli::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

const BASE: &str = "[model]\nkind = \"psystem\"\n[window]\nu_min = -1.0\nu_max = 1.0\nv_min = 0.5\nv_max = 2.0\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let lines: Vec<String> = text.lines().map(str::to_string).collect();
    for l in &lines {
        if let Ok((path, value)) = parse_override(l) {
            let mut t = toml::Table::new();
            let _ = apply(&mut t, &path, value);
        }
    }
    let _ = ExperimentConfig::from_toml_str(BASE, &lines);
});
