import json

import pytest

from resqa.corpus import parse_record, serialize_record
from resqa.errors import DateRangeError, SchemaError

RAW = json.dumps(
    {
        "doc_id": "A/RES/70/1",
        "title": "Transforming our world",
        "date": "2015-09-25",
        "domain": "both",
        "languages": ["en", "fr"],
        "subjects": ["SUSTAINABLE DEVELOPMENT", "HEALTH"],
        "paragraphs": [
            "The Assembly adopts the agenda. It is universal.",
            "Goals apply to all. Implementation begins now. Reports follow.",
        ],
    }
)


def test_parse_record_counts():
    record = parse_record(RAW)
    assert len(record.paragraphs) == 2
    assert len(record.sentences) == 5
    assert record.sentences[0] == (0, "The Assembly adopts the agenda.")
    assert record.sentences[2][0] == 1


def test_missing_doc_id():
    data = json.loads(RAW)
    del data["doc_id"]
    with pytest.raises(SchemaError, match="doc_id"):
        parse_record(json.dumps(data))


@pytest.mark.parametrize("field", ["title", "date", "domain", "languages", "subjects", "paragraphs"])
def test_missing_required_field(field):
    data = json.loads(RAW)
    del data[field]
    with pytest.raises(SchemaError):
        parse_record(json.dumps(data))


def test_bad_domain_and_language():
    data = json.loads(RAW)
    data["domain"] = "finance"
    with pytest.raises(SchemaError, match="domain"):
        parse_record(json.dumps(data))
    data = json.loads(RAW)
    data["languages"] = ["en", "xx"]
    with pytest.raises(SchemaError, match="language"):
        parse_record(json.dumps(data))


def test_duplicate_subjects_rejected():
    data = json.loads(RAW)
    data["subjects"] = ["HEALTH", "HEALTH"]
    with pytest.raises(SchemaError, match="duplicate"):
        parse_record(json.dumps(data))


def test_date_outside_window_warns_by_default(caplog):
    data = json.loads(RAW)
    data["date"] = "1946-02-01"
    with caplog.at_level("WARNING"):
        record = parse_record(json.dumps(data))
    assert record.date.year == 1946
    assert any("corpus window" in r.message for r in caplog.records)


def test_date_outside_window_strict():
    data = json.loads(RAW)
    data["date"] = "2031-01-01"
    with pytest.raises(DateRangeError):
        parse_record(json.dumps(data), enforce_window=True)


def test_round_trip():
    record = parse_record(RAW)
    again = parse_record(serialize_record(record))
    assert again == record


def test_sentence_containment():
    record = parse_record(RAW)
    for para_idx, sentence in record.sentences:
        assert sentence in record.paragraphs[para_idx]


def test_not_json():
    with pytest.raises(SchemaError, match="JSON"):
        parse_record("{not json")
    with pytest.raises(SchemaError):
        parse_record('"just a string"')
