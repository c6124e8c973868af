"""Bundled datasets against the published values recorded in their metadata."""

from __future__ import annotations

import pytest

from sdsc_nis.conditions import audit
from sdsc_nis.core import validate_dataset
from sdsc_nis.inference import joint_test
from sdsc_nis.io import fixture_names, load_fixture

RECONSTRUCTED = [n for n in fixture_names() if n != "dn23_12"]
# summary verdicts a symmetric reconstruction cannot express
SYMMETRY_LIMITED = {("dn20_angles_10", "nias"), ("dn20_angles_10", "iei")}
# joint tests whose published rejection is not recovered from aggregate values alone
JOINT_MISMATCH = {"ccln_d1"}


def test_all_fixtures_present():
    assert set(fixture_names()) == {
        "dn23_12", "dn23_22", "ccln", "ccln_d1", "ccln_d2", "ccln_d3", "ccln_d6",
        "dn20_dots", "dn20_dots_10", "dn20_dots_20", "dn20_angles", "dn20_angles_10", "dn20_angles_20",
    }


@pytest.mark.parametrize("name", fixture_names())
def test_fixture_metadata_and_validity(name):
    ds = load_fixture(name)
    assert validate_dataset(ds).ok
    assert ds.has_counts
    for key in ("source", "reconstruction", "counts", "published_rows", "published_summary"):
        assert key in ds.metadata


@pytest.mark.parametrize("name", RECONSTRUCTED)
def test_reconstruction_reproduces_published_values(name):
    """Published values carry 2 decimals, so a least-squares fit lands within 0.01."""
    ds = load_fixture(name)
    rep = audit(ds)
    for row in ds.metadata["published_rows"]:
        r = rep.nis_row(row["lower"], row["higher"])
        assert r.lhs == pytest.approx(row["lhs"], abs=0.01)
        assert r.rhs == pytest.approx(row["rhs"], abs=0.01)


@pytest.mark.parametrize("name", fixture_names())
def test_condition_verdicts_match_summary(name):
    ds = load_fixture(name)
    rep = audit(ds)
    summary = ds.metadata["published_summary"]
    if (name, "nias") not in SYMMETRY_LIMITED:
        assert rep.nias_pass == (summary["nias"] == "Pass")
    else:
        assert "limitations" in ds.metadata
    assert rep.niac_pass == (summary["niac"] == "Pass")
    assert not rep.nis_pass


@pytest.mark.parametrize("name", RECONSTRUCTED)
def test_indices_match_summary(name):
    """IDI with full-information normalization; inputs rounded to 0.005 allow 0.015 of drift."""
    ds = load_fixture(name)
    rep = audit(ds)
    summary = ds.metadata["published_summary"]
    assert rep.idi_full_info == pytest.approx(summary["idi"], abs=0.015)
    if (name, "iei") not in SYMMETRY_LIMITED:
        assert rep.iei == pytest.approx(summary["iei"], abs=0.01)


@pytest.mark.parametrize("name", [n for n in fixture_names() if n not in JOINT_MISMATCH])
def test_joint_test_verdict_matches_summary(name):
    ds = load_fixture(name)
    rejected = ds.metadata["published_summary"]["joint_p_value"] == "<0.01"
    assert joint_test(ds).rejects(0.05) == rejected


def test_flat_accuracy_tasks_are_not_rejected():
    for name in ("dn20_angles", "dn20_angles_10", "dn20_angles_20"):
        assert joint_test(load_fixture(name)).p_value > 0.05


def test_dn23_22_reproduces_published_p_values():
    ds = load_fixture("dn23_22")
    assert joint_test(ds).p_value == pytest.approx(0.38, abs=0.01)
