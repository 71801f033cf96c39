from __future__ import annotations

import json
import random

import pytest

from app.evidence import Provider
from app.main import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, NO_PROVIDERS, main
from app.services.corpus.dataset import build_pdf
from app.services.report import load_report

from .util import filler, recovered_names, snapshot_for

BOX_URL = "https://www.box.net/api/1.0/download/u5es7xli4xejrh89kr6xu14tks6grjn3/2072716499"


def _gen(out, provider, platform, version, state):
    argv = [
        "gen-corpus",
        "--provider", provider,
        "--platform", platform,
        "--app-version", version,
        "--state", state,
        "--out", str(out),
    ]
    assert main(argv) == EXIT_OK


def test_missing_input_is_fatal(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", "--internal", str(tmp_path / "missing"), "--out", str(out)]) == EXIT_FATAL
    assert not out.exists()


def test_empty_tree_reports_no_providers(tmp_path):
    (tmp_path / "internal").mkdir()
    out = tmp_path / "report.json"
    assert main(["analyze", "--internal", str(tmp_path / "internal"), "--out", str(out)]) == EXIT_OK
    report = load_report(str(out))
    assert report.snapshots == ()
    assert report.warnings == (NO_PROVIDERS,)
    assert (tmp_path / "report.json.run.json").exists()


def test_generate_then_analyze_android_device(tmp_path):
    corpus = tmp_path / "corpus"
    _gen(corpus, "sugarsync", "android", "3.6", "APS")
    out = tmp_path / "report.json"
    rc = main(
        [
            "analyze",
            "--internal", str(corpus / "internal"),
            "--sd", str(corpus / "sd"),
            "--raw", str(corpus / "raw.img"),
            "--out", str(out),
        ]
    )
    report = load_report(str(out))
    assert rc == (EXIT_PARTIAL if report.partial else EXIT_OK)
    snapshot = snapshot_for(report, Provider.SUGARSYNC)
    assert snapshot.identity.app_version == "unknown_version"
    assert len(recovered_names(snapshot)) == 11
    assert str(tmp_path) not in out.read_text(encoding="utf-8")
    sidecar = json.loads((tmp_path / "report.json.run.json").read_text(encoding="utf-8"))
    assert sidecar["inputs"]["raw"] == str(corpus / "raw.img")


def test_powered_down_report_matches_byte_for_byte(tmp_path):
    outputs = []
    for state in ("APS", "PWD"):
        corpus = tmp_path / state
        _gen(corpus, "box", "ios", "2.7.1", state)
        out = tmp_path / f"{state}.json"
        main(["analyze", "--internal", str(corpus / "internal"), "--out", str(out)])
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_merge_two_reports(tmp_path):
    reports = []
    for version, platform in (("1.6.7", "android"), ("2.7.1", "ios")):
        corpus = tmp_path / version
        _gen(corpus, "box", platform, version, "APS")
        out = tmp_path / f"{version}.json"
        argv = ["analyze", "--internal", str(corpus / "internal"), "--out", str(out)]
        if platform == "android":
            argv[3:3] = ["--sd", str(corpus / "sd")]
        main(argv)
        reports.append(str(out))
    merged_out = tmp_path / "merged.json"
    assert main(["merge", *reports, "--out", str(merged_out)]) == EXIT_OK
    merged = load_report(str(merged_out))
    assert [d.provider for d in merged.merged] == [Provider.BOX]
    assert [item.label for item in merged.inputs] == ["1.6.7.json", "2.7.1.json"]


def test_box_url_command(capsys):
    assert main(["box-url", "--token", "u5es7xli4xejrh89kr6xu14tks6grjn3", "--file-id", "2072716499"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == BOX_URL


def test_box_url_rejects_path_characters():
    with pytest.raises(SystemExit) as info:
        main(["box-url", "--token", "a/b", "--file-id", "1"])
    assert info.value.code == 2


@pytest.mark.parametrize("argv", [["--seed", "x", "--all"], ["--provider", "box"], ["--provider", "icloud", "--platform", "ios", "--app-version", "1", "--state", "APS"]])
def test_gen_corpus_usage_errors(tmp_path, argv):
    with pytest.raises(SystemExit) as info:
        main(["gen-corpus", *argv, "--out", str(tmp_path)])
    assert info.value.code == 2


def test_registry_export(tmp_path):
    out = tmp_path / "registry.json"
    assert main(["registry", "export", "--out", str(out)]) == EXIT_OK
    records = json.loads(out.read_text(encoding="utf-8"))
    assert len(records) >= 40
    assert {"provider", "platform", "version", "role", "pattern", "paper_ref"} <= set(records[0])


def test_carve_command(tmp_path, capsys):
    rng = random.Random("cli:carve")
    content = build_pdf(rng, 5000)
    image = tmp_path / "raw.img"
    image.write_bytes(filler(rng, 4096) + content + filler(rng, 4096))
    assert main(["carve", str(image), "--out", str(tmp_path / "carved")]) == EXIT_OK
    manifest = capsys.readouterr().out.strip()
    assert manifest == str(tmp_path / "carved" / "manifest.json")
    assert (tmp_path / "carved" / "pdf_4096.pdf").read_bytes() == content


def test_merge_needs_two_reports(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["merge", str(tmp_path / "only.json"), "--out", str(tmp_path / "merged.json")])
    assert info.value.code == 2


def test_value_error_inside_a_command_is_fatal(monkeypatch):
    def broken(*_args):
        raise ValueError("host rejected")

    monkeypatch.setattr("app.main.reconstruct_box_url", broken)
    assert main(["box-url", "--token", "abc", "--file-id", "1"]) == EXIT_FATAL
