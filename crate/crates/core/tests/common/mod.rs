#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqrule::io::parse_native_str;
use seqrule::SequenceDatabase;

pub const SAMPLE: &str =
    "a:1 c:2 c:3\nb:5 c:2 e:8 b:6\na:2 c:2 f:10\na:2 a:1 a:2 b:6 c:3 a:3\nd:1 a:1 b:4\n";
pub const SAMPLE_HEAD: &str = "a:1 c:2 c:3\nb:5 c:2 e:8 b:6\na:2 c:2 f:10\n";

pub const DELTAS: [&str; 4] = ["0.01", "0.05", "0.1", "0.3"];
pub const MINCONFS: [&str; 4] = ["0.4", "0.6", "0.8", "1.0"];

/// Small random database: up to 8 sequences of up to 8 events over an
/// alphabet of at most 6 items, utilities 1..=9.
pub fn small_db(seed: u64) -> SequenceDatabase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = rng.gen_range(1..=6u8);
    let sequences = rng.gen_range(1..=8);
    let mut text = String::new();
    for _ in 0..sequences {
        let len = rng.gen_range(1..=8);
        let events: Vec<String> = (0..len)
            .map(|_| {
                format!(
                    "{}:{}",
                    (b'a' + rng.gen_range(0..alphabet)) as char,
                    rng.gen_range(1..=9)
                )
            })
            .collect();
        text.push_str(&events.join(" "));
        text.push('\n');
    }
    parse_native_str(&text).expect("generated text parses")
}

pub fn corpus(n: u64) -> Vec<SequenceDatabase> {
    (0..n).map(small_db).collect()
}
