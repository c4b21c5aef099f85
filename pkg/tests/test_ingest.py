import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamperscore.errors import (
    DanglingMappingTargetError,
    MissingRequiredColumnError,
    UnknownFormatError,
)
from tamperscore.ingest import group_sources, map_to_kb, parse_timeline

CSV_HEADER = "datetime,source,message\n"


def test_parse_small_csv():
    data = CSV_HEADER + (
        "2023-01-05T10:00:00Z,WinRegistry,usb key written\n"
        "2023-01-05T10:00:02Z,WinRegistry,usb key written again\n"
        "2023-01-05T10:00:03Z,EVT,device event\n"
    )
    result = parse_timeline(data.encode("utf-8"), "csv")
    assert len(result.entries) == 3
    assert result.rejects == []
    assert [e.source_type for e in result.entries] == ["WinRegistry", "WinRegistry", "EVT"]


def test_parse_header_only_csv():
    result = parse_timeline(CSV_HEADER.encode("utf-8"), "csv")
    assert result.entries == []


def test_missing_required_column():
    with pytest.raises(MissingRequiredColumnError):
        parse_timeline(b"time,source,message\n2023-01-01T00:00:00Z,a,b\n", "csv")


def test_extra_columns_ignored_and_path_kept():
    data = "datetime,source,message,path,extra\n2023-01-01T00:00:00Z,REG,msg,/win/sys,junk\n"
    result = parse_timeline(data.encode("utf-8"), "csv")
    assert result.entries[0].origin_path == "/win/sys"


def test_quoted_fields():
    data = CSV_HEADER + '2023-01-01T00:00:00Z,REG,"a, quoted, message"\n'
    result = parse_timeline(data.encode("utf-8"), "csv")
    assert result.entries[0].message == "a, quoted, message"


def test_malformed_rows_become_rejects_not_errors():
    data = CSV_HEADER + (
        "2023-01-01T00:00:00Z,REG,good\n"
        "not-a-date,REG,bad timestamp\n"
        ",REG,missing datetime\n"
        "2023-01-01T00:00:02Z,,missing source\n"
    )
    result = parse_timeline(data.encode("utf-8"), "csv")
    assert len(result.entries) == 1
    assert len(result.rejects) == 3
    assert all(r.line_number > 1 for r in result.rejects)


def test_parse_jsonl():
    lines = [
        {"datetime": "2023-01-01T00:00:00Z", "source": "EVT", "message": "one"},
        {"datetime": "2023-01-01T00:00:01+00:00", "source": "EVT", "message": "two", "path": "/l"},
    ]
    data = "\n".join(json.dumps(line) for line in lines)
    result = parse_timeline(data, "jsonl")
    assert len(result.entries) == 2
    assert result.entries[1].origin_path == "/l"


def test_jsonl_bad_lines_rejected():
    data = '{"datetime": "2023-01-01T00:00:00Z", "source": "EVT", "message": "ok"}\nnot json\n'
    result = parse_timeline(data, "jsonl")
    assert len(result.entries) == 1
    assert len(result.rejects) == 1


def test_unknown_format():
    with pytest.raises(UnknownFormatError):
        parse_timeline(b"", "xml")


def test_group_sources_counts():
    data = CSV_HEADER + (
        "2023-01-05T10:00:00Z,WinRegistry,a\n"
        "2023-01-05T10:00:02Z,WinRegistry,b\n"
        "2023-01-05T10:00:03Z,EVT,c\n"
    )
    occurrences = group_sources(parse_timeline(data, "csv").entries)
    assert [(o.source_type, o.count) for o in occurrences] == [("EVT", 1), ("WinRegistry", 2)]


def test_group_sources_empty():
    assert group_sources([]) == []


def test_group_large_single_type():
    # fixture built by an independent generator; its count is the loop bound
    n = 1000
    rows = [f"2023-01-01T00:{i // 60:02d}:{i % 60:02d}Z,MFT,row {i}" for i in range(n)]
    data = CSV_HEADER + "\n".join(rows) + "\n"
    result = parse_timeline(data, "csv")
    occurrences = group_sources(result.entries)
    assert len(occurrences) == 1
    assert occurrences[0].count == n


def test_sample_paths_capped_and_deterministic():
    rows = [f"2023-01-01T00:00:00Z,REG,m,/p/{i}" for i in range(9)]
    data = "datetime,source,message,path\n" + "\n".join(rows) + "\n"
    occurrences = group_sources(parse_timeline(data, "csv").entries)
    assert len(occurrences[0].sample_paths) == 5
    assert list(occurrences[0].sample_paths) == sorted(occurrences[0].sample_paths)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from(["REG", "EVT", "MFT", "LOG"]), max_size=200), st.randoms())
def test_grouping_is_order_invariant(tags, rng):
    rows = [f"2023-01-01T00:00:00Z,{tag},m" for tag in tags]
    shuffled = rows[:]
    rng.shuffle(shuffled)
    original = group_sources(parse_timeline(CSV_HEADER + "\n".join(rows), "csv").entries)
    reshuffled = group_sources(parse_timeline(CSV_HEADER + "\n".join(shuffled), "csv").entries)
    assert original == reshuffled


def test_parse_group_conserves_counts():
    rng = random.Random(7)
    rows = []
    expected = 0
    for i in range(500):
        if rng.random() < 0.1:
            rows.append(f"garbage-date,REG,row {i}")
        else:
            rows.append(f"2023-01-01T01:02:03Z,{rng.choice(['A', 'B', 'C'])},row {i}")
            expected += 1
    result = parse_timeline(CSV_HEADER + "\n".join(rows), "csv")
    occurrences = group_sources(result.entries)
    assert sum(o.count for o in occurrences) == len(result.entries) == expected
    assert len(result.rejects) == 500 - expected


def test_map_to_kb_partition(kb):
    data = CSV_HEADER + (
        "2023-01-05T10:00:00Z,WinRegistry,a\n"
        "2023-01-05T10:00:03Z,EVT,b\n"
        "2023-01-05T10:00:04Z,Mystery,c\n"
    )
    occurrences = group_sources(parse_timeline(data, "csv").entries)
    mapping = {"WinRegistry": "usbstor-key", "EVT": "windows-event-logs"}
    result = map_to_kb(occurrences, mapping, kb)
    assert set(result.mapped) == {"usbstor-key", "windows-event-logs"}
    assert result.unmapped == ("Mystery",)
    assert len(result.mapped) + len(result.unmapped) == len(occurrences)


def test_map_to_kb_empty_mapping(kb):
    occurrences = group_sources(
        parse_timeline(CSV_HEADER + "2023-01-01T00:00:00Z,REG,m\n", "csv").entries
    )
    result = map_to_kb(occurrences, {}, kb)
    assert result.mapped == ()
    assert result.unmapped == ("REG",)


def test_map_to_kb_dangling_target(kb):
    with pytest.raises(DanglingMappingTargetError):
        map_to_kb([], {"REG": "not-a-kb-source"}, kb)


def test_default_mapping_targets_exist(kb):
    from tamperscore.defaults import default_mapping

    result = map_to_kb([], default_mapping(), kb)
    assert result.mapped == () and result.unmapped == ()
