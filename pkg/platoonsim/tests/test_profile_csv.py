import numpy as np
import pytest

from platoonsim.adapters.profile.csv_file import CsvProfileSource
from platoonsim.adapters.profile.synthetic import SyntheticProfileSource
from platoonsim.adapters.storage.csv_files import CsvResultStorage
from platoonsim.core.domain import ProfileConfig
from platoonsim.core.errors import ProfileFormatError

V_MAX = 100.0 / 3.6


def _source(tmp_path, text):
    path = tmp_path / "profile.csv"
    path.write_text(text)
    return CsvProfileSource(str(path), V_MAX)


def test_header_is_optional(tmp_path):
    with_header = _source(tmp_path, "t,v\n0,0\n1,2\n").load_profile(0.5)
    np.testing.assert_allclose(with_header.v, [0.0, 1.0, 2.0])
    without = _source(tmp_path, "0,10\n1,10\n").load_profile(0.2)
    assert len(without.v) == 6


@pytest.mark.parametrize("text, line", [
    ("t,v\n0,5\n0,6\n", 3),
    ("0,5\n1,abc\n", 2),
    ("0,5\n1,6,7\n", 2),
    ("0,5\n1,nan\n", 2),
])
def test_parse_errors_name_the_line(tmp_path, text, line):
    with pytest.raises(ProfileFormatError) as excinfo:
        _source(tmp_path, text).load_profile(0.2)
    assert excinfo.value.line == line


def test_needs_two_rows(tmp_path):
    with pytest.raises(ProfileFormatError):
        _source(tmp_path, "t,v\n0,5\n").load_profile(0.2)


def test_span_shorter_than_one_step_is_a_format_error(tmp_path):
    with pytest.raises(ProfileFormatError) as excinfo:
        _source(tmp_path, "0,1\n0.1,2\n").load_profile(0.2)
    assert "profile.csv" in str(excinfo.value)


def test_trace_must_start_at_time_zero(tmp_path):
    with pytest.raises(ProfileFormatError) as excinfo:
        _source(tmp_path, "t,v\n5,1\n6,2\n").load_profile(0.2)
    assert excinfo.value.line == 2


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        CsvProfileSource(str(tmp_path / "absent.csv"), V_MAX).load_profile(0.2)


def test_written_profile_reads_back(tmp_path):
    settings = ProfileConfig(duration=30.0, noise_sigma=0.3)
    profile = SyntheticProfileSource(settings, seed=4, v_max=V_MAX).load_profile(0.2)
    path = CsvResultStorage(str(tmp_path)).write_profile("synth.csv", profile)
    reread = CsvProfileSource(path, V_MAX).load_profile(0.2)
    assert len(reread.v) == len(profile.v)
    np.testing.assert_allclose(reread.v, profile.v, rtol=0, atol=1e-12)
