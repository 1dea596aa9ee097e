#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = cmcflow::io::parse_initial_surface(text) {
        // Realizing a parsed const/sine spec on a small grid must never
        // panic (file specs defer to the caller).
        let grid = cmcflow::grid::PeriodicGrid::new(vec![8], vec![1.0]).unwrap();
        let _ = spec.build(grid);
    }
});
