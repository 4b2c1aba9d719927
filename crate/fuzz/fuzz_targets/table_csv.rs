#![no_main]

use coopscatter_cli::table::ResultTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(t) = ResultTable::parse_csv(text) {
        // parsed tables re-render and parse back to the same table
        let again = ResultTable::parse_csv(&t.to_csv()).expect("rendered table parses");
        assert_eq!(again.rows, t.rows);
        assert_eq!(again.columns.len(), t.columns.len());
    }
});
