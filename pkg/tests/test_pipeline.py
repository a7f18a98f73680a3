from __future__ import annotations

import json
import shutil
import subprocess
import sys

import filelock
import pytest

from chronograph import export
from chronograph.cli import main
from chronograph.pipeline import PipelineConfig, ConfigError, run_pipeline

from conftest import FIXTURES


@pytest.fixture
def workdir(tmp_path):
    for name in ("dump60.xml", "pipeline.json"):
        shutil.copy(FIXTURES / name, tmp_path / name)
    shutil.copytree(FIXTURES / "news", tmp_path / "news")
    return tmp_path


def test_config_rejects_unknown_keys(workdir):
    data = json.loads((workdir / "pipeline.json").read_text())
    data["colour"] = "blue"
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict(data, workdir)


def test_config_paths_are_relative_to_config(workdir):
    config = PipelineConfig.load(workdir / "pipeline.json")
    assert config.dump == workdir / "dump60.xml"
    assert config.out_dir == workdir / "out"


def test_full_run_writes_manifest(workdir):
    config = PipelineConfig.load(workdir / "pipeline.json")
    result = run_pipeline(config)
    assert result.exit_code == 0
    manifest = json.loads(result.manifest.read_text())
    assert manifest["status"] == "ok"
    assert manifest["stages"] == ["ingest", "graph", "rank", "gender", "news"]
    for name in ("rankings.csv", "gender_timeseries.csv", "graph.graphml", "news/news_report.csv"):
        assert name in manifest["outputs"]
    assert "dump" in manifest["inputs"]


def test_rank_alone_with_missing_graph_names_the_path(workdir, capsys):
    code = main(["run", "--config", str(workdir / "pipeline.json"), "--stages", "rank"])
    assert code == 3
    assert str(workdir / "out" / "graph.graphml") in capsys.readouterr().err


def test_unknown_stage_is_config_error(workdir):
    assert main(["run", "--config", str(workdir / "pipeline.json"), "--stages", "paint"]) == 2


def test_stage_failure_exit_code_and_no_partial_files(workdir, monkeypatch):
    config = PipelineConfig.load(workdir / "pipeline.json")
    assert run_pipeline(config, ["ingest", "graph"]).exit_code == 0

    real_replace = export.os.replace

    def boom(src, dst):
        if str(dst).endswith("rankings.csv"):
            raise OSError("disk full")
        return real_replace(src, dst)

    monkeypatch.setattr(export.os, "replace", boom)
    result = run_pipeline(config, ["rank"])
    assert result.exit_code == 4
    assert "rank" in result.error
    out = workdir / "out"
    assert not (out / "rankings.csv").exists()
    assert not list(out.glob(".rankings.csv.*"))
    assert json.loads((out / "manifest.json").read_text())["status"] == "failed"


def test_second_process_is_locked_out(workdir):
    config = PipelineConfig.load(workdir / "pipeline.json")
    config.out_dir.mkdir()
    with filelock.FileLock(str(config.out_dir / ".chronograph.lock")):
        assert run_pipeline(config, ["ingest"]).exit_code == 2


def test_rerun_gives_identical_digests(workdir):
    config = PipelineConfig.load(workdir / "pipeline.json")
    first = json.loads(run_pipeline(config).manifest.read_text())["outputs"]
    second = json.loads(run_pipeline(config).manifest.read_text())["outputs"]
    assert first == second


def test_thread_count_does_not_change_output(workdir, monkeypatch):
    config = PipelineConfig.load(workdir / "pipeline.json")
    run_pipeline(config, ["ingest", "graph", "rank"])
    one = (config.out_dir / "slice_rankings.csv").read_bytes()
    monkeypatch.setenv("CHRONOGRAPH_THREADS", "4")
    run_pipeline(config, ["rank"])
    assert (config.out_dir / "slice_rankings.csv").read_bytes() == one


def test_subcommands(workdir, capsys):
    out = workdir / "cli"
    assert main(["ingest", "--dump", str(workdir / "dump60.xml"), "--lang", "en", "--lexicon", "en",
                 "--out", str(out / "index.jsonl"), "--texts-out", str(out / "texts.jsonl")]) == 0
    assert json.loads(capsys.readouterr().out)["persons"] == 41
    assert main(["graph", "--index", str(out / "index.jsonl"), "--out-dir", str(out),
                 "--slice-from", "-100", "--slice-to", "100", "--slice-step", "50"]) == 0
    assert (out / "slices").is_dir()
    capsys.readouterr()
    assert main(["rank", "--graph", str(out / "graph.graphml"), "--top", "5", "--categories", "default",
                 "--sphere", "en", "--out", str(out / "rankings.csv")]) == 0
    assert len((out / "rankings.csv").read_text().splitlines()) == 6
    assert main(["gender", "--index", str(out / "index.jsonl"), "--lexicon", "en", "--texts", str(out / "texts.jsonl"),
                 "--timeseries", "-500", "1950", "--step", "100", "--out", str(out)]) == 0
    assert (out / "gender_timeseries.csv").read_text().startswith("year,percent_female,population\n")
    assert main(["gender", "--validate", str(FIXTURES / "gender" / "de.jsonl"), "--lexicon", "de"]) == 0
    capsys.readouterr()
    assert main(["news", "--listing", str(workdir / "news" / "listing_en.txt"), "--articles",
                 str(workdir / "news" / "articles"), "--lexicon", "en", "--top", "3", "--out-dir", str(out / "news")]) == 0
    report = (out / "news" / "news_report.csv").read_text().splitlines()
    assert report[0] == "language,mean_sentiment,mean_emotionality,mean_complexity,scored"


def test_cli_error_codes(workdir, capsys):
    assert main(["ingest", "--dump", str(workdir / "nope.xml"), "--out", str(workdir / "i.jsonl")]) == 3
    assert main(["ingest", "--dump", str(workdir / "dump60.xml"), "--rules", "xx",
                 "--out", str(workdir / "i.jsonl")]) == 2


def test_module_entry_point(workdir):
    proc = subprocess.run([sys.executable, "-m", "chronograph", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "chronograph" in proc.stdout


def test_news_fetch_two_word_form(tmp_path, monkeypatch, capsys):
    from chronograph import wikinews

    seen = {}

    def fake_fetch(titles, out, lang, rps, concurrency):
        seen.update(titles=titles, out=out, lang=lang)
        return wikinews.FetchReport(fetched=list(titles), cached=[], failed={})

    monkeypatch.setattr(wikinews, "fetch_articles", fake_fetch)
    titles = tmp_path / "titles.txt"
    titles.write_text("Hamas\nGermany\n", encoding="utf-8")
    code = main(["news", "fetch", "--titles", str(titles), "--out", str(tmp_path / "a"), "--lang", "de"])
    assert code == 0
    assert seen == {"titles": ["Hamas", "Germany"], "out": str(tmp_path / "a"), "lang": "de"}
    assert json.loads(capsys.readouterr().out)["fetched"] == 2
