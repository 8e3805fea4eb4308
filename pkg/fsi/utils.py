import json
import os

from fsi.errors import FsiParseError, FsiValidationError

MAX_ELEMENT = 2**64 - 1


def _read_text(source) -> str:
    data = source.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise FsiParseError(f"input is not UTF-8: {err}") from None
    return data


def _split_lines(text: str):
    if text == "":
        return []
    lines = text.split("\n")
    # A trailing newline terminates the last line rather than opening a new one.
    if lines[-1] == "":
        lines.pop()
    return lines


def _parse_uint(token: str, line_no: int) -> int:
    if not token or not token.isascii() or not token.isdigit():
        raise FsiParseError(f"expected an unsigned integer, got {token!r}",
                            line=line_no)
    value = int(token)
    if value > MAX_ELEMENT:
        raise FsiParseError(f"{token} does not fit in 64 bits", line=line_no)
    return value


def read_sets_lines(source):
    """
    Parse a Sets File into one element list per line.

    Arguments:
        source: binary or text stream. One set per line, elements are base-10
            unsigned integers separated by single spaces, a blank line is an
            empty set.

    Returns:
        sets (list): list of element lists, in line order, duplicates kept.
    """
    sets = []
    for line_no, line in enumerate(_split_lines(_read_text(source)), start=1):
        if line == "":
            sets.append([])
            continue
        sets.append([_parse_uint(tok, line_no) for tok in line.split(" ")])
    return sets


def write_sets_lines(sets, stream):
    for elements in sets:
        stream.write(" ".join(str(x) for x in elements))
        stream.write("\n")


def read_color_array(source):
    """
    Parse a color array file: one base-10 color per line, position i is line i.
    Color 0 is reserved for padding and is rejected.
    """
    colors = []
    for line_no, line in enumerate(_split_lines(_read_text(source)), start=1):
        color = _parse_uint(line.strip(), line_no)
        if color == 0:
            raise FsiParseError("color 0 is reserved", line=line_no)
        colors.append(color)
    return colors


def parse_interval(text: str):
    """Parse an interval written as "l:r" into a (l, r) tuple."""
    parts = text.split(":")
    if len(parts) != 2:
        raise FsiValidationError(f"interval must look like l:r, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise FsiValidationError(
            f"interval must look like l:r, got {text!r}") from None
    return lo, hi


def load_corpus_records(path: str):
    """
    Read a document corpus from disk.

    A directory is read as a collection of .txt files; document ids are the
    1-based positions of the file names in sorted order. Anything else is read
    as a JSON-lines file whose records carry an integer "id" and a string
    "text". The directory check takes precedence.

    Returns:
        records (list): (doc_id, text) tuples in input order.
    """
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path) if n.endswith(".txt"))
        records = []
        for doc_id, name in enumerate(names, start=1):
            with open(os.path.join(path, name), encoding="utf-8") as fh:
                records.append((doc_id, fh.read()))
        return records

    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise FsiParseError(err.msg, line=line_no) from None
            if not isinstance(obj, dict) or not isinstance(
                    obj.get("id"), int) or not isinstance(obj.get("text"), str):
                raise FsiParseError(
                    'record needs an integer "id" and a string "text"',
                    line=line_no)
            records.append((obj["id"], obj["text"]))
    return records
