import pytest
from hypothesis import given, settings

from conftest import partitioned_graphs

from dmr import instance_io
from dmr.instance_io import HardHeader, ParseError


@settings(max_examples=200, deadline=None)
@given(partitioned_graphs())
def test_round_trip(partition):
    back, hard = instance_io.loads(instance_io.dumps(partition))
    assert hard is None
    assert back == partition
    assert back.graph.edges == partition.graph.edges


def test_hard_header_round_trip(path3):
    from dmr.graph import EdgePartition

    part = EdgePartition(path3, 2, (0, 1, 1))
    header = HardHeader(0.1, 0.005, 2, 42)
    text = instance_io.dumps(part, header)
    assert text.splitlines()[1] == "# hard alpha=0.1 p=0.005 r=2 seed=42"
    back, hard = instance_io.loads(text)
    assert hard == header and back == part


def test_comments_and_blank_lines_ignored():
    text = "# leading\nDMR v1  # magic\n\nn 2 2\nk 1\nm 1   # one edge\ne 0 1 0\n# trailing\n"
    part, _ = instance_io.loads(text)
    assert part.graph.edges == ((0, 1),)
    assert part.k == 1


def test_file_round_trip(tmp_path, path3):
    from dmr.graph import EdgePartition

    part = EdgePartition(path3, 3, (2, 0, 1))
    path = tmp_path / "g.txt"
    instance_io.save(path, part)
    assert path.read_text().endswith("\n")
    assert instance_io.load(path)[0] == part


@pytest.mark.parametrize(
    "text",
    [
        "",
        "DMR v2\nn 1 1\nk 1\nm 0\n",
        "DMR v1\nn 1\nk 1\nm 0\n",
        "DMR v1\nn 1 1\nk 1\nm 2\ne 0 0 0\n",
        "DMR v1\nn 1 1\nk 1\nm 1\ne 0 1 0\n",
        "DMR v1\nn 1 1\nk 1\nm 1\ne 0 0 1\n",
        "DMR v1\nn 2 2\nk 1\nm 2\ne 0 0 0\ne 0 0 0\n",
        "DMR v1\nn 1 1\nk 1\nm 1\ne 0 x 0\n",
        "DMR v1\n# hard alpha=0.1 p=oops r=1 seed=0\nn 1 1\nk 1\nm 0\n",
    ],
)
def test_malformed_input(text):
    with pytest.raises(ParseError):
        instance_io.loads(text)
