import hashlib
import json
import shutil

import pytest

from asrkit.cli import main

from test_corpus import build_corpus


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def corpus_dir(tmp_path):
    build_corpus(tmp_path / "corpus", rows=10, silent={3})
    return tmp_path / "corpus"


def _hash_tree(root):
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_ingest_writes_manifest_and_qc(corpus_dir, tmp_path, capsys):
    out = tmp_path / "ingested"
    code, _, err = run(
        capsys, "ingest", "--tsv", str(corpus_dir / "corpus.tsv"),
        "--audio-root", str(corpus_dir), "--lang", "pt", "--out", str(out),
    )
    assert code == 0
    assert (out / "manifest.tsv").exists()
    qc_doc = json.loads((out / "qc_summary.json").read_text())
    assert qc_doc["qc"]["silent"] == 1
    assert (out / "run_config.json").exists()
    assert all(json.loads(line) for line in err.strip().splitlines())


def test_plan_lists_eight_configs(corpus_dir, tmp_path, capsys):
    ingested = tmp_path / "ing"
    run(capsys, "ingest", "--tsv", str(corpus_dir / "corpus.tsv"),
        "--audio-root", str(corpus_dir), "--out", str(ingested))
    plan_dir = tmp_path / "plan"
    code, _, _ = run(
        capsys, "plan", "--manifest", str(ingested / "manifest.tsv"),
        "--fraction", "0.2", "--seed", "42", "--out", str(plan_dir),
    )
    assert code == 0
    doc = json.loads((plan_dir / "plan.json").read_text())
    assert [c["name"] for c in doc["configs"]] == [
        "baseline", "bs", "gn", "ps", "bs+gn", "bs+ps", "gn+ps", "bs+gn+ps",
    ]
    assert doc["seed"] == 42


@pytest.fixture
def planned(corpus_dir, tmp_path, capsys):
    ingested = tmp_path / "ing"
    run(capsys, "ingest", "--tsv", str(corpus_dir / "corpus.tsv"),
        "--audio-root", str(corpus_dir), "--out", str(ingested))
    plan_dir = tmp_path / "plan"
    run(capsys, "plan", "--manifest", str(ingested / "manifest.tsv"),
        "--fraction", "0.2", "--seed", "7", "--out", str(plan_dir))
    return plan_dir / "plan.json"


def test_augment_rerun_hashes_identical(planned, tmp_path, capsys):
    out = tmp_path / "aug"
    trees = []
    for _ in range(2):
        if out.exists():
            shutil.rmtree(out)
        code, _, _ = run(
            capsys, "augment", "--plan", str(planned),
            "--config", "bs+gn+ps", "--out-dir", str(out),
        )
        assert code == 0
        trees.append(_hash_tree(out))
    assert trees[0] == trees[1]
    wavs = list((out / "bs+gn+ps" / "wavs").glob("*.wav"))
    assert len(wavs) == 6  # 3 tags x round(0.2*10)


def test_augment_unknown_config(planned, tmp_path, capsys):
    code, _, err = run(
        capsys, "augment", "--plan", str(planned), "--config", "nope",
        "--out-dir", str(tmp_path / "x"),
    )
    assert code == 2
    assert "nope" in err


def test_normalize_stdin(capsys, monkeypatch):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO("Olá, Mundo!\n"))
    code, out, _ = run(capsys, "normalize")
    assert code == 0
    assert out.strip() == "olá mundo"


def test_score_perfect_hypotheses(corpus_dir, tmp_path, capsys):
    ingested = tmp_path / "ing"
    run(capsys, "ingest", "--tsv", str(corpus_dir / "corpus.tsv"),
        "--audio-root", str(corpus_dir), "--out", str(ingested))
    manifest_lines = (ingested / "manifest.tsv").read_text().strip().splitlines()
    header = manifest_lines[0].split("\t")
    sid, sent = header.index("source_id"), header.index("sentence")
    hyp_lines = ["source_id\thypothesis"]
    for line in manifest_lines[1:]:
        fields = line.split("\t")
        hyp_lines.append(f"{fields[sid]}\t{fields[sent]}")
    hyp = tmp_path / "hyp.tsv"
    hyp.write_text("\n".join(hyp_lines) + "\n", encoding="utf-8")

    code, out, _ = run(
        capsys, "score", "--manifest", str(ingested / "manifest.tsv"),
        "--hyp", str(hyp), "--json",
    )
    assert code == 0
    doc = json.loads(out.splitlines()[0])
    assert doc["wer"] == 0.0
    assert doc["cer"] == 0.0


def test_score_per_utt_table(corpus_dir, tmp_path, capsys):
    ingested = tmp_path / "ing"
    run(capsys, "ingest", "--tsv", str(corpus_dir / "corpus.tsv"),
        "--audio-root", str(corpus_dir), "--out", str(ingested))
    hyp = tmp_path / "hyp.tsv"
    hyp.write_text("source_id\thypothesis\nutt000\tuma frase de teste\n", encoding="utf-8")
    code, out, _ = run(
        capsys, "score", "--manifest", str(ingested / "manifest.tsv"),
        "--hyp", str(hyp), "--per-utt",
    )
    assert code == 0
    assert "corpus WER" in out
    assert "utt000" in out


def test_usage_error_exit_code(capsys):
    code, _, _ = run(capsys, "plan")  # missing required flags
    assert code == 1


def test_data_error_exit_code(tmp_path, capsys):
    code, _, err = run(
        capsys, "ingest", "--tsv", str(tmp_path / "missing.tsv"),
        "--audio-root", str(tmp_path), "--out", str(tmp_path / "o"),
    )
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["level"] == "error"


def test_help_documents_flags(capsys):
    code, _, _ = run(capsys, "--help")
    assert code == 0
    for sub, flags in {
        "ingest": ["--tsv", "--audio-root", "--lang", "--silence-db", "--out"],
        "plan": ["--manifest", "--fraction", "--seed", "--tags", "--out"],
        "augment": ["--plan", "--config", "--workers", "--out-dir", "--independent-draws"],
        "score": ["--strip-diacritics", "--per-utt", "--json"],
    }.items():
        code, out, _ = run(capsys, sub, "--help")
        assert code == 0
        for flag in flags:
            assert flag in out, (sub, flag)
