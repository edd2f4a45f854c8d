import pytest

from src.errors import BadMagic, PcapFormatError, TruncatedRecord
from src.pcap import PcapSink, iter_pcap, read_pcap

FRAME = bytes(range(60))
RECORD = 16 + len(FRAME)


def _write(path, n=3, snaplen=65535):
    sink = PcapSink(path, snaplen)
    for i in range(n):
        sink.write(1_000_000 + i * 10, FRAME)
    sink.close()
    return path


def test_records_read_back_in_order(tmp_path):
    path = _write(tmp_path / "a.pcap")
    assert read_pcap(path) == [(1_000_000, FRAME), (1_000_010, FRAME), (1_000_020, FRAME)]
    assert path.stat().st_size == 24 + 3 * RECORD


def test_snaplen_keeps_the_wire_length(tmp_path):
    path = _write(tmp_path / "a.pcap", n=1, snaplen=34)
    (ts, data, orig_len), = iter_pcap(path)
    assert data == FRAME[:34] and orig_len == len(FRAME)


def test_bad_magic(tmp_path):
    path = _write(tmp_path / "a.pcap")
    raw = bytearray(path.read_bytes())
    raw[0:4] = b"\xd4\xc3\xb2\xa1"
    path.write_bytes(bytes(raw))
    with pytest.raises(BadMagic) as ei:
        read_pcap(path)
    assert ei.value.offset == 0
    assert isinstance(ei.value, PcapFormatError)


def test_record_cut_inside_its_data(tmp_path):
    path = _write(tmp_path / "a.pcap")
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(TruncatedRecord) as ei:
        read_pcap(path)
    assert ei.value.offset == 24 + 2 * RECORD
    assert ei.value.path == path


def test_record_cut_inside_its_header(tmp_path):
    path = _write(tmp_path / "a.pcap", n=2)
    path.write_bytes(path.read_bytes()[: 24 + RECORD + 8])
    with pytest.raises(TruncatedRecord) as ei:
        read_pcap(path)
    assert ei.value.offset == 24 + RECORD


def test_short_global_header(tmp_path):
    path = tmp_path / "a.pcap"
    path.write_bytes(b"\xd4\xc3\xb2\xa1\x02\x00")
    with pytest.raises(TruncatedRecord) as ei:
        read_pcap(path)
    assert ei.value.offset == 0
