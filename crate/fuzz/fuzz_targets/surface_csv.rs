#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(surface) = cmcflow::io::parse_surface_csv(text) {
        let again = cmcflow::io::parse_surface_csv(&cmcflow::io::surface_to_csv(&surface))
            .expect("round trip of an accepted surface");
        assert_eq!(surface, again);
    }
});
