mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::*;

fn spoofaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spoofaug")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_scores(path: &Path, rows: &[(&str, &str, f64, &str, &str)]) {
    let mut text = String::from("utt_id\tlabel\tscore\tattack\tcodec\n");
    for (id, label, score, attack, codec) in rows {
        text.push_str(&format!("{id}\t{label}\t{score}\t{attack}\t{codec}\n"));
    }
    fs::write(path, text).unwrap();
}

fn two_attack_fixture(path: &Path) {
    write_scores(
        path,
        &[
            ("b1", "bonafide", 2.0, "-", "none"),
            ("b2", "bonafide", 3.0, "-", "mp3"),
            ("b3", "bonafide", 4.0, "-", "none"),
            ("a1", "spoof", 0.0, "A01", "none"),
            ("a2", "spoof", 1.0, "A01", "mp3"),
            ("c1", "spoof", 10.0, "A02", "none"),
            ("c2", "spoof", 11.0, "A02", "mp3"),
        ],
    );
}

#[test]
fn eer_of_perfectly_separated_scores() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.tsv");
    write_scores(
        &p,
        &[("b1", "bonafide", 0.9, "-", "-"), ("b2", "bonafide", 0.8, "-", "-"), ("s1", "spoof", 0.1, "A01", "-")],
    );
    let o = spoofaug(&["eer", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("EER: 0.00%\n"));
}

#[test]
fn fusing_a_set_with_itself_keeps_its_eer() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    two_attack_fixture(&a);
    let fused = dir.path().join("fused.tsv");
    let o = spoofaug(&["fuse", a.to_str().unwrap(), a.to_str().unwrap(), "--weights", "1,3", "-o", fused.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = stdout(&spoofaug(&["eer", a.to_str().unwrap()]));
    let second = stdout(&spoofaug(&["eer", fused.to_str().unwrap()]));
    assert_eq!(first.lines().next(), second.lines().next());
}

#[test]
fn pooled_by_attack_and_codec() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.tsv");
    two_attack_fixture(&p);
    let o = spoofaug(&["pooled", p.to_str().unwrap(), "--by", "attack"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "A01\t0.00%\nA02\t100.00%\n");
    let o = spoofaug(&["pooled", p.to_str().unwrap(), "--by", "codec"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("mp3\t") && text.contains("none\t"));
}

#[test]
fn report_is_sorted_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.tsv");
    two_attack_fixture(&p);
    let out = dir.path().join("report.json");
    let o = spoofaug(&["report", p.to_str().unwrap(), p.to_str().unwrap(), "--seed", "9", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.ends_with("}\n"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["provenance"]["seed"], 9);
    assert_eq!(v["fusion"]["weights"], serde_json::json!([1.0, 1.0]));
    assert_eq!(v["pooled_by_attack"]["A01"]["eer"], 0.0);
    assert_eq!(v["pooled_by_attack"]["A02"]["eer"], 1.0);
    assert!(v["overall"]["eer"].is_number());
    // regenerating gives identical bytes
    spoofaug(&["report", p.to_str().unwrap(), p.to_str().unwrap(), "--seed", "9", "-o", out.to_str().unwrap()]);
    assert_eq!(fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn inspect_writes_magnitude_csv() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("t.wav");
    spoofaug::write_wav(&tone(2048, 1000.0, 16_000), &wav).unwrap();
    let csv = dir.path().join("mag.csv");
    let o = spoofaug(&["inspect", wav.to_str().unwrap(), "--stft-csv", csv.to_str().unwrap(), "--frame-size", "256", "--hop", "128"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "15 frames x 129 bins\n");
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 15);
    assert!(text.lines().all(|l| l.split(',').count() == 129));
}

#[test]
fn augment_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output) = (dir.path().join("in"), dir.path().join("out"));
    make_corpus(&input, 3);
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, audio_config(&input, &output, 1, 2, ALL_AUDIO_STAGES)).unwrap();
    let o = spoofaug(&["augment", "--config", cfg.to_str().unwrap(), "--emit-provenance"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("processed 3 files: 3 ok, 0 failed"));

    fs::write(input.join("bad.wav"), b"junk").unwrap();
    let o = spoofaug(&["augment", "--config", cfg.to_str().unwrap(), "--parallelism", "4"]);
    assert_eq!(o.status.code(), Some(1));

    fs::write(&cfg, format!("{}\nunknown_key = 1\n", audio_config(&input, &output, 1, 2, ""))).unwrap();
    assert_eq!(spoofaug(&["augment", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let prob = ALL_AUDIO_STAGES.replace("0.7", "1.5");
    fs::write(&cfg, audio_config(&input, &output, 1, 2, &prob)).unwrap();
    assert_eq!(spoofaug(&["augment", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(spoofaug(&["features"]).status.code(), Some(2));
}
