import json
import math
import os

import pytest

import hintscope


def test_registry_has_25_hints():
    hs = hintscope.hints()
    assert len(hs) == 25
    rtt = next(h for h in hs if h["header"] == "RTT")
    assert rtt["level"] == "high"
    assert rtt["group"] == "network"


def test_parse_accept_ch_keeps_unknown_tokens():
    parsed = hintscope.parse_accept_ch("sec-ch-ua-model, Sec-CH-Device-Memory")
    assert parsed["recognized"] == ["Sec-CH-UA-Model"]
    assert parsed["unrecognized"] == ["Sec-CH-Device-Memory"]
    assert hintscope.suggest_hint_name("sec-ch-device-memory") == "Device-Memory"
    assert hintscope.max_level("dpr, sec-ch-ua-full-version-list") == "very high"
    assert hintscope.max_level("") is None


def test_emulate():
    assert "chrome-116-desktop" in hintscope.profiles()
    assert hintscope.emulate("firefox-desktop", "sec-ch-ua") == {}
    headers = hintscope.emulate("chrome-116-desktop", "rtt")
    assert len(headers) == 4
    assert "RTT" in headers
    with pytest.raises(KeyError):
        hintscope.emulate("netscape-4")


def test_stats():
    assert hintscope.chi_squared_sf(14.8, 2) == pytest.approx(math.exp(-7.4), rel=1e-12)
    assert hintscope.format_p(hintscope.chi_squared_sf(14.8, 2)) == "0.0006"
    r = hintscope.chi_squared([[10, 90], [30, 70]])
    assert r["chi2"] == pytest.approx(12.5)
    assert r["dof"] == 1
    assert hintscope.bonferroni([0.0004, 0.02, 0.2], 3) == pytest.approx([0.0012, 0.06, 0.6])
    with pytest.raises(ValueError):
        hintscope.chi_squared([[0, 1], [0, 2]])


def test_domains_and_trackers():
    assert hintscope.registrable_domain("accounts.google.com") == "google.com"
    assert hintscope.registrable_domain("co.uk") is None
    assert hintscope.is_tracker("https://ads.example/t.js", "||ads.example^\n")
    assert not hintscope.is_tracker("https://cdn.example/t.js", "||ads.example^\n")
    assert hintscope.score_login_candidate("https://a.example/login", "Sign in") == 3


def test_analyze_roundtrip(tmp_path):
    rec = {
        "schema": "hintscope.crawl-record",
        "version": 1,
        "run_id": "py",
        "rank": 1,
        "target_domain": "a.example",
        "url": "https://a.example/",
        "page_kind": "start",
        "vantage": {"region": "lab", "isp": "none"},
        "timestamp": "2023-09-01T00:00:00Z",
        "status": 200,
        "error": None,
        "accept_ch": {"raw": ["sec-ch-ua-model"], "recognized": ["Sec-CH-UA-Model"], "unrecognized": []},
        "third_parties": [],
        "test_transport": False,
    }
    path = tmp_path / "r.jsonl"
    path.write_text(json.dumps(rec) + "\n")
    files = hintscope.analyze([str(path)], str(tmp_path / "out"))
    summary = json.loads(files["summary.json"])
    assert summary["sites"] == 1
    assert os.path.exists(tmp_path / "out" / "hint_frequency.csv")
    assert "Sec-CH-UA-Model" in files["hint_frequency.csv"]

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"schema": "other", "version": 1}\n')
    with pytest.raises(ValueError):
        hintscope.analyze([str(bad)])
