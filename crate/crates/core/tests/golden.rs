//! Golden values for the Gilbert-Elliott channel at block length 4.
//!
//! The CSV stores shortest round-trip decimal forms, so a match is bit-exact.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

use std::path::PathBuf;

use polarmem::channel::FiniteStateChannel;
use polarmem::noise::GilbertElliottNoise;
use polarmem::polar::PolarTransform;
use polarmem::trellis::split_channel_exact;

const LEN: usize = 4;
const HEADER: &str = "L,i,Z,Z_stderr,I,I_stderr,method";

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/ge_len4.csv")
}

fn ge_fsc() -> FiniteStateChannel {
    FiniteStateChannel::gilbert_elliott(&GilbertElliottNoise::symmetric(0.1, 0.02, 0.25).unwrap())
}

fn render(fsc: &FiniteStateChannel) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in split_channel_exact(fsc, LEN).unwrap() {
        out.push_str(&format!("{LEN},{},{:?},0,{:?},0,enumeration\n", r.index, r.z, r.i));
    }
    out
}

/// Brute force over all inputs and outputs using the block likelihood directly.
#[allow(clippy::needless_range_loop)]
fn naive_split(fsc: &FiniteStateChannel, len: usize) -> Vec<(f64, f64)> {
    let polar = PolarTransform::new(len).unwrap();
    let o = fsc.outputs();
    let bits = |v: usize| (0..len).map(|k| ((v >> k) & 1) as u8).collect::<Vec<u8>>();
    let outputs: Vec<Vec<usize>> = (0..o.pow(len as u32))
        .map(|mut v| {
            (0..len)
                .map(|_| {
                    let d = v % o;
                    v /= o;
                    d
                })
                .collect()
        })
        .collect();
    // like[u][y] = P(y | x = encode(u))
    let like: Vec<Vec<f64>> = (0..1usize << len)
        .map(|u| {
            let x = polar.encode(&bits(u)).unwrap();
            outputs
                .iter()
                .map(|y| fsc.sequence_likelihood(&x, y, None).unwrap())
                .collect()
        })
        .collect();
    let scale = 1.0 / (1u64 << (len - 1)) as f64;
    (0..len)
        .map(|i| {
            let (mut z, mut mi) = (0.0, 0.0);
            for prefix in 0..1usize << i {
                for yk in 0..outputs.len() {
                    let mut w = [0.0f64; 2];
                    for u in 0..1usize << len {
                        if u & ((1 << i) - 1) == prefix {
                            w[(u >> i) & 1] += scale * like[u][yk];
                        }
                    }
                    z += (w[0] * w[1]).sqrt();
                    let mix = 0.5 * (w[0] + w[1]);
                    for wb in w {
                        if wb > 0.0 {
                            mi += 0.5 * wb * (wb / mix).log2();
                        }
                    }
                }
            }
            (z, mi)
        })
        .collect()
}

#[test]
fn ge_block_four_matches_golden_file() {
    let rendered = render(&ge_fsc());
    let path = golden_path();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &rendered).unwrap();
    }
    let stored = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(rendered, stored);
}

#[test]
fn golden_values_agree_with_brute_force() {
    let stored = std::fs::read_to_string(golden_path()).expect("golden file present");
    let naive = naive_split(&ge_fsc(), LEN);
    let mut lines = stored.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), LEN);
    for (row, (z, mi)) in rows.iter().zip(&naive) {
        let gz: f64 = row[2].parse().unwrap();
        let gi: f64 = row[4].parse().unwrap();
        assert!((gz - z).abs() < 1e-12, "Z {gz} vs {z}");
        assert!((gi - mi).abs() < 1e-12, "I {gi} vs {mi}");
    }
}
