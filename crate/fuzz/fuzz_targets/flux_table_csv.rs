#![no_main]

use hyperstab::approx::GhostRule;
use hyperstab::io::{read_flux_table_csv, write_flux_table_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(table) = read_flux_table_csv(data) else { return };
    let mut buf = Vec::new();
    write_flux_table_csv(&mut buf, &table).expect("accepted table writes");
    let again = read_flux_table_csv(buf.as_slice()).expect("written table reads back");
    assert_eq!(table.phi0, again.phi0);
    let _ = table.splines(GhostRule::default());
});
