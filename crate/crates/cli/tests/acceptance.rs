//! Release acceptance suite: one test per criterion, each printing a
//! single PASS/FAIL line (visible with `cargo test --test acceptance --
//! --nocapture`). Criteria 1–5 and 7 exercise the core library against
//! independent oracles; 6 and 8 drive the `spoofcm` binary end to end.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ndarray::Array2;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use spoofcm_core::batcher::{make_batches, BatchStrategy};
use spoofcm_core::codecsim::{self, cvsd, g711, g726, CodecConfig, CompandingLaw};
use spoofcm_core::losses::LossHead;
use spoofcm_core::manifest::{Key, Manifest, Record};
use spoofcm_core::metrics::{compute_eer, fuse, split_scores, ScoreFile};
use spoofcm_core::util::snr_db;
use spoofcm_core::Waveform;

fn criterion(n: usize, what: &str, body: impl FnOnce()) {
    let start = Instant::now();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!(
            "acceptance criterion {n} ({what}): PASS [{:.1}s]",
            start.elapsed().as_secs_f64()
        ),
        Err(cause) => {
            println!("acceptance criterion {n} ({what}): FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}

// ---------------------------------------------------------------------
// 1. loss gradients vs central finite differences

/// Vector-norm relative error between analytic and numeric gradients of
/// every quantity the head differentiates.
fn gradient_rel_error(head: &LossHead, x: &Array2<f64>, labels: &[usize]) -> f64 {
    let h = 1e-5;
    let out = head.forward(x, labels).unwrap();
    let mut analytic = Vec::new();
    let mut numeric = Vec::new();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            analytic.push(out.grad_x[[i, j]]);
            let mut xp = x.clone();
            xp[[i, j]] += h;
            let mut xm = x.clone();
            xm[[i, j]] -= h;
            let lp = head.forward(&xp, labels).unwrap().loss;
            let lm = head.forward(&xm, labels).unwrap().loss;
            numeric.push((lp - lm) / (2.0 * h));
        }
    }
    for (k, (_, w)) in head.params().iter().enumerate() {
        for j in 0..w.len() {
            analytic.push(out.grad_w[k][j]);
            let mut hp = head.clone();
            hp.params_mut()[k].1[j] += h;
            let mut hm = head.clone();
            hm.params_mut()[k].1[j] -= h;
            let lp = hp.forward(x, labels).unwrap().loss;
            let lm = hm.forward(x, labels).unwrap().loss;
            numeric.push((lp - lm) / (2.0 * h));
        }
    }
    let diff: f64 = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

#[test]
fn criterion_1_gradient_suite() {
    criterion(1, "loss gradients match finite differences", || {
        let start = Instant::now();
        type Make = Box<dyn Fn(usize, u64) -> LossHead>;
        let heads: Vec<(&str, Make)> = vec![
            ("softmax", Box::new(LossHead::new_softmax)),
            (
                "am m=0.3",
                Box::new(|d, s| LossHead::new_am_softmax(d, 20.0, 0.3, s).unwrap()),
            ),
            (
                "am m=0.9",
                Box::new(|d, s| LossHead::new_am_softmax(d, 20.0, 0.9, s).unwrap()),
            ),
            (
                "oc (0.9,0.3)",
                Box::new(|d, s| LossHead::new_oc_softmax(d, 20.0, 0.9, 0.3, s).unwrap()),
            ),
            (
                "oc (0.5,0.2)",
                Box::new(|d, s| LossHead::new_oc_softmax(d, 20.0, 0.5, 0.2, s).unwrap()),
            ),
        ];
        let mut rng = StdRng::seed_from_u64(0x6772_6164);
        for (name, make) in &heads {
            for draw in 0..100u64 {
                let d = rng.random_range(2..=8);
                let n = rng.random_range(1..=6);
                let head = make(d, draw);
                // coordinates kept away from zero so embedding norms stay
                // well conditioned for the finite differences
                let x = Array2::from_shape_fn((n, d), |_| {
                    let mag = rng.random_range(0.2..2.0);
                    if rng.random::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                });
                let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
                let rel = gradient_rel_error(&head, &x, &labels);
                assert!(
                    rel < 1e-4,
                    "{name} draw {draw}: gradient rel error {rel:.3e} >= 1e-4"
                );
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 60.0, "gradient suite took {elapsed:.1}s (>= 60s)");
    });
}

// ---------------------------------------------------------------------
// 2. fast EER vs brute-force threshold sweep

/// Reference EER: direct counting at every distinct score, no sorted
/// bookkeeping shared with the production path.
fn eer_brute_force(bona: &[f64], spoof: &[f64]) -> f64 {
    let mut thresholds: Vec<f64> = bona.iter().chain(spoof).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let rates = |t: f64| {
        let far = spoof.iter().filter(|&&x| x >= t).count() as f64 / spoof.len() as f64;
        let frr = bona.iter().filter(|&&x| x < t).count() as f64 / bona.len() as f64;
        (far, frr)
    };
    let mut prev = (0.0, 1.0);
    for &t in &thresholds {
        let (far, frr) = rates(t);
        if far >= frr {
            let (far1, frr1) = prev;
            let denom = (far - far1) + (frr1 - frr);
            let frac = if denom > 0.0 { (frr1 - far1) / denom } else { 0.0 };
            return (far1 + frac * (far - far1)) * 100.0;
        }
        prev = (far, frr);
    }
    unreachable!("threshold sweep must cross");
}

#[test]
fn criterion_2_eer_oracle() {
    criterion(2, "EER matches brute-force sweep and worked example", || {
        let eer = compute_eer(&[0.9, 0.8, 0.4], &[0.7, 0.3, 0.2]).unwrap();
        assert!((eer - 100.0 / 3.0).abs() < 1e-9, "worked example: {eer}");

        let mut rng = StdRng::seed_from_u64(0xee12);
        for inst in 0..200 {
            let nb = rng.random_range(1..=50);
            let ns = rng.random_range(1..=50);
            // half the instances on a coarse grid to force ties, within
            // and across classes
            let quantized = inst % 2 == 0;
            let mut draw = |n: usize| -> Vec<f64> {
                (0..n)
                    .map(|_| {
                        let v = rng.random_range(-1.5_f64..1.5);
                        if quantized {
                            (v * 10.0).round() / 10.0
                        } else {
                            v
                        }
                    })
                    .collect()
            };
            let bona = draw(nb);
            let spoof = draw(ns);
            let fast = compute_eer(&bona, &spoof).unwrap();
            let brute = eer_brute_force(&bona, &spoof);
            assert!(
                (fast - brute).abs() < 1e-9,
                "instance {inst}: fast {fast} vs brute {brute}"
            );
        }
    });
}

// ---------------------------------------------------------------------
// 3. batching invariants over random manifests

/// Kuhn's augmenting-path matching: every spoof in the batch must pair
/// with a distinct bonafide sharing its group token.
fn has_perfect_matching(
    manifest: &Manifest,
    batch: &[usize],
    group_of: impl Fn(&Record) -> String,
) -> bool {
    let spoofs: Vec<usize> = batch
        .iter()
        .copied()
        .filter(|&i| manifest.records()[i].key == Key::Spoof)
        .collect();
    let bonas: Vec<usize> = batch
        .iter()
        .copied()
        .filter(|&i| manifest.records()[i].key == Key::Bonafide)
        .collect();
    if spoofs.len() != bonas.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = spoofs
        .iter()
        .map(|&s| {
            let g = group_of(&manifest.records()[s]);
            bonas
                .iter()
                .enumerate()
                .filter(|(_, &b)| group_of(&manifest.records()[b]) == g)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    fn try_assign(
        s: usize,
        adj: &[Vec<usize>],
        matched: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &b in &adj[s] {
            if !visited[b] {
                visited[b] = true;
                if matched[b].is_none() || try_assign(matched[b].unwrap(), adj, matched, visited) {
                    matched[b] = Some(s);
                    return true;
                }
            }
        }
        false
    }
    let mut matched = vec![None; bonas.len()];
    (0..spoofs.len()).all(|s| {
        let mut visited = vec![false; bonas.len()];
        try_assign(s, &adj, &mut matched, &mut visited)
    })
}

#[test]
fn criterion_3_batching_invariants() {
    criterion(3, "batching invariants over 1000 random manifests", || {
        let mut rng = StdRng::seed_from_u64(0xba7c);
        for round in 0..1000u32 {
            let n_speakers = rng.random_range(1..=4usize);
            let n_tags = rng.random_range(1..=3usize);
            // enough bonafide that every speaker / tag group has a partner
            let n_bona = rng.random_range(n_speakers.max(n_tags)..=40);
            let n_spoof = rng.random_range(1..=60);
            let mut records = Vec::new();
            for i in 0..n_bona + n_spoof {
                records.push(Record {
                    speaker: format!("S{}", i % n_speakers),
                    utt_id: format!("u{i:04}"),
                    key: if i < n_bona { Key::Bonafide } else { Key::Spoof },
                    attack: None,
                    codec_tag: Some(format!("c{}", i % n_tags)),
                });
            }
            let m = Manifest::from_records(records);
            let n = m.len();
            let seed = u64::from(round);

            let any_size = rng.random_range(1..=12);
            let batches = make_batches(&m, BatchStrategy::Random, any_size, seed).unwrap();
            let mut seen: Vec<usize> = batches.concat();
            seen.sort_unstable();
            assert_eq!(seen, (0..n).collect::<Vec<_>>(), "random coverage, round {round}");

            let even_size = 2 * rng.random_range(1..=5usize);
            let half = even_size / 2;
            let batches = make_batches(&m, BatchStrategy::CustomClass, even_size, seed).unwrap();
            for b in &batches {
                assert_eq!(b.len(), even_size);
                let spoofs = b.iter().filter(|&&i| m.records()[i].key == Key::Spoof).count();
                assert_eq!(spoofs, half, "class balance, round {round}");
            }

            let batches = make_batches(&m, BatchStrategy::CustomSpeak, even_size, seed).unwrap();
            for b in &batches {
                assert!(
                    has_perfect_matching(&m, b, |r| r.speaker.clone()),
                    "speaker matching, round {round}"
                );
            }

            let batches = make_batches(&m, BatchStrategy::CustomSim, even_size, seed).unwrap();
            for b in &batches {
                assert!(
                    has_perfect_matching(&m, b, |r| r.codec_tag.clone().unwrap()),
                    "codec-tag matching, round {round}"
                );
            }
        }
    });
}

// ---------------------------------------------------------------------
// 4. cyclic degradation plan counts

#[test]
fn criterion_4_cyclic_plan() {
    criterion(4, "cyclic plan counts for N=40224, K=16 and K=45", || {
        let records: Vec<Record> = (0..40_224)
            .map(|i| Record {
                speaker: format!("S{}", i % 20),
                utt_id: format!("U{i:05}"),
                key: if i % 3 == 0 { Key::Bonafide } else { Key::Spoof },
                attack: None,
                codec_tag: None,
            })
            .collect();
        let manifest = Manifest::from_records(records);
        let list = |k: usize| -> Vec<CodecConfig> {
            (1..=k)
                .map(|i| CodecConfig::passthrough().with_loss(i as f64 / 100.0))
                .collect()
        };
        for seed in [1u64, 2] {
            let counts = manifest.assign_degradations(&list(16), seed).unwrap().config_counts();
            assert_eq!(counts.len(), 16);
            assert!(counts.values().all(|&c| c == 2_514), "{counts:?}");

            let counts = manifest.assign_degradations(&list(45), seed).unwrap().config_counts();
            assert_eq!(counts.len(), 45);
            assert!(counts.values().all(|&c| c == 893 || c == 894), "{counts:?}");
            assert_eq!(counts.values().filter(|&&c| c == 894).count(), 39);
            assert_eq!(counts.values().sum::<usize>(), 40_224);
        }
    });
}

// ---------------------------------------------------------------------
// 5. codec properties

fn sine(freq: f64, amp: f64, rate: u32, n: usize) -> Waveform {
    let samples: Vec<f32> = (0..n)
        .map(|i| (amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin()) as f32)
        .collect();
    Waveform::new(samples, rate).unwrap()
}

/// Harmonic tone with a silent tail, enough structure for every stage.
fn speech_like(n: usize) -> Waveform {
    let samples: Vec<f32> = (0..n)
        .map(|i| {
            if i >= n.saturating_sub(n / 6) {
                return 0.0;
            }
            let t = i as f64 / 16_000.0;
            let mut v = 0.0;
            for k in 1..=8u32 {
                v += (2.0 * std::f64::consts::PI * 150.0 * f64::from(k) * t).sin()
                    / f64::from(k * k);
            }
            (0.25 * v) as f32
        })
        .collect();
    Waveform::new(samples, 16_000).unwrap()
}

#[test]
fn criterion_5_codec_properties() {
    criterion(5, "codec SNR and length properties", || {
        // mu-law round trip on a -6 dBFS 1 kHz tone at 8 kHz
        let tone = sine(1_000.0, 0.5, 8_000, 8_000);
        let out = g711::transcode(&tone, CompandingLaw::Mu).unwrap();
        let snr = snr_db(tone.samples(), out.samples());
        assert!(snr > 30.0, "mu-law SNR {snr:.1} dB");

        // G.726 SNR non-decreasing with bitrate (skip the adaptation
        // transient at the start)
        let tone = sine(800.0, 0.4, 8_000, 16_000);
        let snrs: Vec<f64> = [16_000u32, 24_000, 32_000, 40_000]
            .iter()
            .map(|&b| {
                let out = g726::transcode(&tone, b).unwrap();
                snr_db(&tone.samples()[4_000..], &out.samples()[4_000..])
            })
            .collect();
        for pair in snrs.windows(2) {
            assert!(pair[1] >= pair[0], "G.726 SNR not monotone: {snrs:?}");
        }

        // CVSD: 4 bits/sample beats 1 bit/sample (64 vs 16 kbit/s at 16 kHz)
        let tone = sine(440.0, 0.4, 16_000, 16_000);
        let snr_4bit = {
            let out = cvsd::transcode(&tone, 64_000).unwrap();
            snr_db(&tone.samples()[2_000..], &out.samples()[2_000..])
        };
        let snr_1bit = {
            let out = cvsd::transcode(&tone, 16_000).unwrap();
            snr_db(&tone.samples()[2_000..], &out.samples()[2_000..])
        };
        assert!(
            snr_4bit > snr_1bit,
            "CVSD SNR 4-bit {snr_4bit:.1} dB <= 1-bit {snr_1bit:.1} dB"
        );

        // packet-loss sweep: mean SNR over seeds must not increase with
        // the loss rate
        let speech = speech_like(16_000);
        let mean_snr = |rate: f64| -> f64 {
            let cfg = CodecConfig::passthrough().with_loss(rate);
            (0..24u64)
                .map(|seed| {
                    let out = codecsim::degrade(&speech, &cfg, seed).unwrap();
                    snr_db(speech.samples(), out.samples())
                })
                .sum::<f64>()
                / 24.0
        };
        let sweep: Vec<f64> = [0.0, 0.1, 0.3, 0.5].iter().map(|&r| mean_snr(r)).collect();
        for pair in sweep.windows(2) {
            assert!(pair[1] <= pair[0], "loss sweep SNR not non-increasing: {sweep:?}");
        }

        // every pipeline preserves duration (to one sample on odd input)
        let configs = [
            "passthrough",
            "passthrough:band=narrow",
            "passthrough:loss=0.3",
            "g711:law=mu",
            "g711:law=a,dtx=true",
            "g726:bitrate=16000",
            "g726:bitrate=40000",
            "g726:bitrate=24000,loss=0.2,dtx=true",
            "cvsd:bitrate=16000",
            "cvsd:bitrate=64000",
        ];
        for (n, exact) in [(24_000usize, true), (24_001, false)] {
            let w = speech_like(n);
            for text in configs {
                let cfg = CodecConfig::parse(text).unwrap();
                let out = codecsim::degrade(&w, &cfg, 11).unwrap();
                let delta = out.len() as i64 - w.len() as i64;
                if exact {
                    assert_eq!(delta, 0, "{text}: length {} vs {}", out.len(), w.len());
                } else {
                    assert!(delta.abs() <= 1, "{text}: length {} vs {}", out.len(), w.len());
                }
            }
        }
    });
}

// ---------------------------------------------------------------------
// 6 & 8: pipeline runs through the binary

fn spoofcm(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_spoofcm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn spoofcm");
    assert!(
        out.status.success(),
        "spoofcm {args:?} failed ({}):\n--- stdout\n{}--- stderr\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn eer_of(dir: &Path, manifest: &str, scores: &str) -> f64 {
    let manifest = Manifest::read(&dir.join(manifest)).unwrap();
    let scores = ScoreFile::read(&dir.join(scores)).unwrap();
    let (bona, spoof) = split_scores(&scores, &manifest).unwrap();
    compute_eer(&bona, &spoof).unwrap()
}

const TRAIN_SEED: u64 = 101;
const EVAL_SEED: u64 = 202;

#[test]
fn criterion_6_desk_scale_directions() {
    criterion(6, "desk-scale direction experiment", || {
        let start = Instant::now();
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();

        write(
            dir,
            "mct_codecs.txt",
            "passthrough\ng711:law=mu\ng711:law=a\ng726:bitrate=16000\n\
             g726:bitrate=32000\ncvsd:bitrate=16000\ncvsd:bitrate=64000\n",
        );
        write(dir, "cvsd_codecs.txt", "cvsd:bitrate=16000\n");
        write(
            dir,
            "g726_codecs.txt",
            "g726:bitrate=16000\ng726:bitrate=24000\ng726:bitrate=32000\ng726:bitrate=40000\n",
        );

        let paths = |audio: &str, cache: &str, out: &str| {
            format!(
                "[paths]\nmanifest = \"train/manifest.txt\"\naudio_root = \"train/{audio}\"\n\
                 cache_root = \"train/{cache}\"\noutput_root = \"train/{out}\"\n"
            )
        };
        let epaths = |audio: &str, cache: &str, out: &str| {
            format!(
                "[paths]\nmanifest = \"eval/manifest.txt\"\naudio_root = \"eval/{audio}\"\n\
                 cache_root = \"eval/{cache}\"\noutput_root = \"eval/{out}\"\n"
            )
        };

        // clean-trained model
        write(
            dir,
            "t_base.toml",
            &format!(
                "{}\n[synth]\nn_utts = 450\nn_speakers = 6\n\n[trainer]\nepochs = 12\n\n\
                 [seeds]\nmaster = {TRAIN_SEED}\n",
                paths("audio", "cache_clean", "out_clean")
            ),
        );
        // multi-condition degradation + model
        write(
            dir,
            "t_degrade.toml",
            &format!(
                "{}degraded_root = \"train/degraded\"\ncodec_list = \"mct_codecs.txt\"\n\n\
                 [seeds]\nmaster = {TRAIN_SEED}\n",
                paths("audio", "cache_clean", "out_degrade_mct")
            ),
        );
        write(
            dir,
            "t_mct.toml",
            &format!(
                "{}\n[trainer]\nepochs = 12\n\n[seeds]\nmaster = {TRAIN_SEED}\n",
                paths("degraded", "cache_mct", "out_mct")
            ),
        );
        // bitrate-matched low-capacity model for the G.726 sweep
        write(
            dir,
            "t_degrade_g726.toml",
            &format!(
                "{}degraded_root = \"train/degraded_g726\"\ncodec_list = \"g726_codecs.txt\"\n\n\
                 [seeds]\nmaster = {TRAIN_SEED}\n",
                paths("audio", "cache_clean", "out_degrade_g726")
            ),
        );
        write(
            dir,
            "t_g726.toml",
            &format!(
                "{}\n[encoder]\nembed_dim = 8\nblocks = [[4, 3, 2]]\n\n\
                 [trainer]\nepochs = 6\n\n[seeds]\nmaster = {TRAIN_SEED}\n",
                paths("degraded_g726", "cache_g726", "out_g726")
            ),
        );

        // eval corpus, scored against each model
        write(
            dir,
            "e_base.toml",
            &format!(
                "{}\n[synth]\nn_utts = 240\nn_speakers = 6\n\n\
                 [score]\ncheckpoint = \"train/out_clean/model.ckpt\"\noutput = \"scores.txt\"\n\n\
                 [seeds]\nmaster = {EVAL_SEED}\n",
                epaths("audio", "cache_clean", "out_clean")
            ),
        );
        write(
            dir,
            "e_degrade_cvsd.toml",
            &format!(
                "{}degraded_root = \"eval/degraded_cvsd\"\ncodec_list = \"cvsd_codecs.txt\"\n\n\
                 [seeds]\nmaster = {EVAL_SEED}\n",
                epaths("audio", "cache_clean", "out_degrade_cvsd")
            ),
        );
        write(
            dir,
            "e_cvsd_clean.toml",
            &format!(
                "{}\n[score]\ncheckpoint = \"train/out_clean/model.ckpt\"\noutput = \"scores.txt\"\n\n\
                 [seeds]\nmaster = {EVAL_SEED}\n",
                epaths("degraded_cvsd", "cache_cvsd", "out_cvsd_clean")
            ),
        );
        write(
            dir,
            "e_cvsd_mct.toml",
            &format!(
                "{}\n[score]\ncheckpoint = \"train/out_mct/model.ckpt\"\noutput = \"scores.txt\"\n\n\
                 [seeds]\nmaster = {EVAL_SEED}\n",
                epaths("degraded_cvsd", "cache_cvsd", "out_cvsd_mct")
            ),
        );
        write(
            dir,
            "e_degrade_g726.toml",
            &format!(
                "{}degraded_root = \"eval/degraded_g726\"\ncodec_list = \"g726_codecs.txt\"\n\n\
                 [seeds]\nmaster = {EVAL_SEED}\n",
                epaths("audio", "cache_clean", "out_degrade_g726")
            ),
        );
        write(
            dir,
            "e_g726.toml",
            &format!(
                "{}\n[score]\ncheckpoint = \"train/out_g726/model.ckpt\"\noutput = \"scores.txt\"\n\n\
                 [report]\nscores = \"scores.txt\"\nplan = \"eval/degraded_g726/plan.txt\"\n\n\
                 [seeds]\nmaster = {EVAL_SEED}\n",
                epaths("degraded_g726", "cache_g726", "out_g726")
            ),
        );

        for (cmd, cfg) in [
            ("synth", "t_base.toml"),
            ("extract", "t_base.toml"),
            ("train", "t_base.toml"),
            ("degrade", "t_degrade.toml"),
            ("extract", "t_mct.toml"),
            ("train", "t_mct.toml"),
            ("degrade", "t_degrade_g726.toml"),
            ("extract", "t_g726.toml"),
            ("train", "t_g726.toml"),
            ("synth", "e_base.toml"),
            ("extract", "e_base.toml"),
            ("score", "e_base.toml"),
            ("degrade", "e_degrade_cvsd.toml"),
            ("extract", "e_cvsd_clean.toml"),
            ("score", "e_cvsd_clean.toml"),
            ("score", "e_cvsd_mct.toml"),
            ("degrade", "e_degrade_g726.toml"),
            ("extract", "e_g726.toml"),
            ("score", "e_g726.toml"),
            ("report", "e_g726.toml"),
        ] {
            spoofcm(dir, &[cmd, "--config", cfg]);
        }

        // (a) clean-trained model on clean eval
        let eer_clean = eer_of(dir, "eval/manifest.txt", "eval/out_clean/scores.txt");
        assert!(eer_clean <= 5.0, "clean/clean EER {eer_clean:.2}% > 5%");

        // (b) the same model degrades on CVSD 1-bit audio
        let eer_cvsd = eer_of(dir, "eval/manifest.txt", "eval/out_cvsd_clean/scores.txt");
        assert!(
            eer_cvsd > eer_clean,
            "CVSD eval EER {eer_cvsd:.2}% not above clean {eer_clean:.2}%"
        );

        // (c) multi-condition training recovers on the same degraded eval
        let eer_mct = eer_of(dir, "eval/manifest.txt", "eval/out_cvsd_mct/scores.txt");
        assert!(
            eer_mct < eer_cvsd,
            "MCT EER {eer_mct:.2}% not below clean-trained {eer_cvsd:.2}%"
        );

        // (d) per-bitrate EER non-increasing with G.726 bitrate
        let report = std::fs::read_to_string(dir.join("eval/out_g726/report.csv")).unwrap();
        let mut by_bitrate = Vec::new();
        for line in report.lines() {
            if let Some(rest) = line.strip_prefix("bitrate=") {
                let mut fields = rest.split(',');
                let bitrate: u32 = fields.next().unwrap().parse().unwrap();
                let eer: f64 = fields.next().unwrap().parse().expect("EER must not be NA");
                by_bitrate.push((bitrate, eer));
            }
        }
        by_bitrate.sort_unstable_by_key(|&(b, _)| b);
        assert_eq!(
            by_bitrate.iter().map(|&(b, _)| b).collect::<Vec<_>>(),
            vec![16_000, 24_000, 32_000, 40_000],
            "report must cover each G.726 bitrate"
        );
        for pair in by_bitrate.windows(2) {
            assert!(
                pair[1].1 <= pair[0].1,
                "EER increases with bitrate: {by_bitrate:?}"
            );
        }

        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 900.0, "experiment took {elapsed:.0}s (>= 15 min)");
        println!(
            "  clean/clean {eer_clean:.2}%, clean/cvsd {eer_cvsd:.2}%, mct/cvsd {eer_mct:.2}%, \
             g726 by bitrate {:?}",
            by_bitrate.iter().map(|&(_, e)| e).collect::<Vec<_>>()
        );
    });
}

// ---------------------------------------------------------------------
// 7. fusion arithmetic

#[test]
fn criterion_7_fusion_exactness() {
    criterion(7, "fusion weights apply exactly", || {
        let mut rng = StdRng::seed_from_u64(0xf0_5e);
        let mut a = ScoreFile::new();
        let mut b = ScoreFile::new();
        for i in 0..50 {
            let utt = format!("U{i:03}");
            a.push(&utt, rng.random_range(-2.0..2.0)).unwrap();
            b.push(&utt, rng.random_range(-2.0..2.0)).unwrap();
        }

        let fused = fuse(&[a.clone(), b.clone()], &[10.0, 90.0]).unwrap();
        for (utt, score) in fused.entries() {
            let expect = 0.1 * a.get(utt).unwrap() + 0.9 * b.get(utt).unwrap();
            assert_eq!(
                score.to_bits(),
                expect.to_bits(),
                "{utt}: fused {score} != 0.1*s1 + 0.9*s2 = {expect}"
            );
        }

        // single live weight: bitwise copy of the live file
        let solo = fuse(&[a.clone(), b.clone()], &[5.0, 0.0]).unwrap();
        for (utt, score) in solo.entries() {
            assert_eq!(score.to_bits(), a.get(utt).unwrap().to_bits(), "{utt}");
        }

        // self-fusion is the identity after formatting
        for weights in [[10.0, 90.0], [1.0, 1.0], [0.25, 0.75], [7.0, 3.0]] {
            let same = fuse(&[a.clone(), a.clone()], &weights).unwrap();
            assert_eq!(same.to_text(), a.to_text(), "weights {weights:?}");
        }
    });
}

// ---------------------------------------------------------------------
// 8. byte-identical replays

#[test]
fn criterion_8_reproducibility() {
    criterion(8, "independent runs are byte-identical", || {
        let synth_cfg = "[paths]\nmanifest = \"manifest.txt\"\naudio_root = \"audio\"\n\
                         cache_root = \"cache\"\noutput_root = \"out\"\n\
                         degraded_root = \"degraded\"\ncodec_list = \"codecs.txt\"\n\n\
                         [synth]\nn_utts = 60\nn_speakers = 4\n\n[seeds]\nmaster = 7\n";
        let main_cfg = "[paths]\nmanifest = \"manifest.txt\"\naudio_root = \"degraded\"\n\
                        cache_root = \"cache\"\noutput_root = \"out\"\n\
                        degraded_root = \"degraded\"\n\n\
                        [encoder]\nembed_dim = 16\nblocks = [[4, 3, 2]]\n\n\
                        [batch]\nbatch_size = 16\n\n[trainer]\nepochs = 2\n\n\
                        [seeds]\nmaster = 7\n";
        let codecs = "g711:law=mu\ng726:bitrate=24000,loss=0.2,dtx=true\n\
                      cvsd:bitrate=64000\npassthrough:loss=0.1\n";

        let run = || -> (tempfile::TempDir, Vec<Vec<u8>>) {
            let tmp = tempfile::tempdir().unwrap();
            let dir = tmp.path();
            write(dir, "synth.toml", synth_cfg);
            write(dir, "main.toml", main_cfg);
            write(dir, "codecs.txt", codecs);
            for (cmd, cfg) in [
                ("synth", "synth.toml"),
                ("degrade", "synth.toml"),
                ("extract", "main.toml"),
                ("train", "main.toml"),
                ("score", "main.toml"),
                ("report", "main.toml"),
            ] {
                spoofcm(dir, &[cmd, "--config", cfg]);
            }
            let artifacts = ["degraded/plan.txt", "out/scores.txt", "out/report.csv"]
                .iter()
                .map(|p| std::fs::read(dir.join(p)).unwrap())
                .collect();
            (tmp, artifacts)
        };

        let (_keep_a, first) = run();
        let (_keep_b, second) = run();
        for (name, (a, b)) in ["plan", "scores", "report"].iter().zip(first.iter().zip(&second)) {
            assert_eq!(a, b, "{name} differs between runs");
        }
    });
}
