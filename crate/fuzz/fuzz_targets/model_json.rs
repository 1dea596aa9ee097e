#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = cmcflow::io::parse_model_json(text) {
        // Accepted documents must survive a serialization round trip.
        let again = cmcflow::io::parse_model_json(&cmcflow::io::model_to_json(&model))
            .expect("round trip of an accepted model");
        assert_eq!(model, again);
    }
});
