#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = injectopt::instances::parse_generator_spec(data);
});
