#![no_main]

use hyperstab_cli::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::from_toml_str(text, &[]) {
            // anything accepted must validate again unchanged
            cfg.validate().expect("accepted config revalidates");
        }
    }
});
