import json
import os
import shutil
from pathlib import Path

import pytest

from zsat.corpus import CorpusSpec, Manifest, generate, manifest_path, plan
from zsat.ontology import default_config_text, load_taxonomy
from zsat.scanner import ScanConfig, scan
from zsat.sigdetect import detect, read_header


def _tree(root: Path):
    return sorted((str(p.relative_to(root)), p.read_bytes() if p.is_file() else None) for p in root.rglob("*"))


def test_seed_determinism(tmp_path):
    spec = CorpusSpec(seed=7, innocuous_files=300, planted_images=20, planted_videos=1,
                      planted_keyword_files=3, planted_mismatch_files=3, directories=25)
    a = generate(spec, tmp_path / "a")
    b = generate(spec, tmp_path / "b")
    assert a == b
    assert manifest_path(tmp_path / "a").read_text() == manifest_path(tmp_path / "b").read_text()
    assert _tree(tmp_path / "a") == _tree(tmp_path / "b")
    c = generate(CorpusSpec(seed=8, innocuous_files=300, planted_images=20, directories=25), tmp_path / "c")
    assert c.entries != a.entries


def test_five_hundred_images(taxonomy):
    files, dirs = plan(CorpusSpec(innocuous_files=2000, planted_images=500, directories=200))
    images = [f for f in files if f.planted]
    assert len(images) == 500 and len(dirs) == 200
    for f in images:
        assert f.family == "image" and "SIZE_THRESHOLD" in f.reasons
        fmt = detect(f.header, f.name.rsplit(".", 1)[1], taxonomy)
        assert fmt.family_name == "image" and not fmt.mismatch
        assert f.size >= taxonomy.format_by_name(fmt.format_name).criteria.min_size_bytes


def test_empty_corpus(tmp_path):
    m = generate(CorpusSpec(), tmp_path / "empty")
    assert m.entries == [] and list((tmp_path / "empty").iterdir()) == []


def test_refuses_non_empty_or_existing_manifest(tmp_path):
    out = tmp_path / "busy"
    out.mkdir()
    (out / "keep.txt").write_text("evidence")
    with pytest.raises(FileExistsError):
        generate(CorpusSpec(innocuous_files=1), out)
    assert [p.name for p in out.iterdir()] == ["keep.txt"]
    generate(CorpusSpec(innocuous_files=1), tmp_path / "fresh")
    shutil.rmtree(tmp_path / "fresh")
    with pytest.raises(FileExistsError):
        generate(CorpusSpec(innocuous_files=1), tmp_path / "fresh")


def test_manifest_lives_beside_corpus(tmp_path):
    generate(CorpusSpec(innocuous_files=5), tmp_path / "c")
    assert manifest_path(tmp_path / "c") == (tmp_path / "c.manifest.json").resolve()
    assert not any(p.name.endswith(".manifest.json") for p in (tmp_path / "c").rglob("*"))


def test_manifest_round_trip(tmp_path):
    m = generate(CorpusSpec(innocuous_files=40, planted_images=15, directories=5), tmp_path / "c")
    assert Manifest.from_json(manifest_path(tmp_path / "c").read_text()) == m


@pytest.mark.parametrize("kwargs", [dict(innocuous_files=-1), dict(directories=0), dict(keyword=""),
                                    dict(keyword="a/b"), dict(keyword="x.jpg")])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        CorpusSpec(**kwargs)


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_unique_paths_and_counts(seed):
    spec = CorpusSpec(seed=seed, innocuous_files=500, planted_images=30, planted_videos=3,
                      planted_keyword_files=4, planted_mismatch_files=4, planted_music=2, directories=40)
    files, dirs = plan(spec)
    paths = [f"{f.rel_dir}/{f.name}" for f in files]
    assert len(paths) == len(set(paths)) == 543
    assert len(dirs) == len(set(dirs)) == 40
    assert all(f.reasons for f in files if f.planted)


@pytest.fixture(scope="module")
def keyword_taxonomy():
    doc = json.loads(default_config_text())
    for fam in doc["families"]:
        for fmt in fam["formats"]:
            fmt["criteria"]["keywords"] = ["secret"]
    return load_taxonomy(json.dumps(doc))


@pytest.mark.parametrize("seed", [7, 11, 12])
def test_manifest_exactly_predicts_findings(tmp_path, keyword_taxonomy, seed):
    spec = CorpusSpec(seed=seed, innocuous_files=800, planted_images=60, planted_videos=3,
                      planted_keyword_files=8, planted_mismatch_files=8, directories=40)
    m = generate(spec, tmp_path / "c", keyword_taxonomy)
    r = scan(ScanConfig(tmp_path / "c"), keyword_taxonomy)
    found = {f.rel_path: {x.value for x in f.reasons} for f in r.findings}
    expected = {e.rel_path: set(e.expected_reasons) for e in m.entries if e.expected_reasons}
    assert found == expected
    # proximity filters are exercised by the reserved directories
    all_reasons = set().union(*expected.values())
    assert {"GROUPED", "ISOLATED", "KEYWORD_MATCH", "EXTENSION_MISMATCH", "SIZE_THRESHOLD"} <= all_reasons


def test_planted_headers_are_read_back(tmp_path, taxonomy):
    m = generate(CorpusSpec(planted_images=4, planted_videos=1, planted_mismatch_files=2, planted_music=1),
                 tmp_path / "c")
    for e in m.entries:
        p = tmp_path / "c" / e.rel_path
        det = detect(read_header(p), p.suffix[1:], taxonomy)
        assert det.family_name == e.expected_family
        assert det.mismatch == ("EXTENSION_MISMATCH" in e.expected_reasons)
        assert os.path.getsize(p) > 0
