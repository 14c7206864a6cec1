from __future__ import annotations

import re
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

EDGE_LIST_EXTENSIONS: tuple[str, ...] = (".txt", ".edges", ".el", ".tsv", ".csv")
GRAPH_ID_PATTERN: re.Pattern[str] = re.compile(r"[^a-z0-9_\-]+")


class FileUtility:

    @staticmethod
    def get_paths(
        input_folder: Path,
        extension: Iterable[str] | None,
    ) -> Iterator[Path]:
        """Files directly inside `input_folder`, sorted by name, optionally by suffix."""
        if not input_folder.exists() or not input_folder.is_dir():
            error_msg: str = f"Input folder '{input_folder}' does not exist"
            raise NotADirectoryError(error_msg)

        suffixes: set[str] | None = (
            {suffix.lower() for suffix in extension} if extension is not None else None
        )
        return (
            f
            for f in sorted(input_folder.iterdir())
            if f.is_file() and (suffixes is None or f.suffix.lower() in suffixes)
        )

    @staticmethod
    def file_clean_string(
        string: str,
    ) -> str:
        lowercase: str = string.lower()
        no_space_on_borders: str = lowercase.strip()
        return GRAPH_ID_PATTERN.sub("_", no_space_on_borders).strip("_")

    @staticmethod
    def graph_id_from_path(
        path: Path,
    ) -> str:
        """Row label for a graph file: its cleaned stem, e.g. 'CA-GrQc.txt' -> 'ca-grqc'."""
        graph_id: str = FileUtility.file_clean_string(path.stem)
        if not graph_id:
            error_msg: str = f"Cannot derive a graph id from '{path.name}'"
            raise ValueError(error_msg)

        return graph_id


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def test_file_utility_get_paths_valid_directory() -> None:
    """Test FileUtility.get_paths with a valid directory."""
    import tempfile

    with tempfile.TemporaryDirectory() as temp_dir:
        test_dir: Path = Path(temp_dir) / "graphs"
        test_dir.mkdir()

        (test_dir / "b_graph.txt").write_text("0 1\n")
        (test_dir / "a_graph.edges").write_text("0 1\n")
        (test_dir / "notes.md").write_text("ignore me")
        (test_dir / "subdir").mkdir()

        paths: list[Path] = list(FileUtility.get_paths(test_dir, None))
        assert len(paths) == 3

        graph_paths: list[Path] = list(
            FileUtility.get_paths(test_dir, EDGE_LIST_EXTENSIONS),
        )
        assert [path.name for path in graph_paths] == ["a_graph.edges", "b_graph.txt"]


def test_file_utility_get_paths_missing_directory() -> None:
    """A missing folder raises NotADirectoryError."""
    import tempfile

    import pytest

    with tempfile.TemporaryDirectory() as temp_dir, pytest.raises(
        NotADirectoryError,
        match="does not exist",
    ):
        FileUtility.get_paths(Path(temp_dir) / "missing", None)


def test_graph_id_from_path() -> None:
    """Stems are lowercased and reduced to safe characters."""
    import pytest

    assert FileUtility.graph_id_from_path(Path("data/CA-GrQc.txt")) == "ca-grqc"
    assert FileUtility.graph_id_from_path(Path("Email Enron (v2).txt")) == "email_enron_v2"
    with pytest.raises(ValueError, match="graph id"):
        FileUtility.graph_id_from_path(Path("().txt"))


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
