#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(record) = cmcflow::io::parse_flow_record(text) {
        let again = cmcflow::io::parse_flow_record(&cmcflow::io::flow_record_to_json(
            &record.model,
            &record.grid,
            record.c,
            &record.snapshots,
        ))
        .expect("round trip of an accepted record");
        assert_eq!(record.model, again.model);
        assert_eq!(record.snapshots.len(), again.snapshots.len());
    }
});
