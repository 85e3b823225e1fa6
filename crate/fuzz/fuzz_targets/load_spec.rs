#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    papm_core::fuzzing::load_spec_input(data);
});
