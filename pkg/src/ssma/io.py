"""Text formats for datasets, fitted models, experiment configs and result tables."""

from __future__ import annotations

import contextlib
import io as _io
import json
import sys
from pathlib import Path

import numpy as np

from .alignment import AlignmentModel, AlignmentParams
from .data import DomainDataset, MultiDomainDataset, Standardization
from .errors import ConfigError, DataError
from .evaluate import RESULT_COLUMNS, ExperimentConfig, ExperimentResult, ResultRow

DATASET_MAGIC = "#ssma-dataset"
DATASET_VERSION = "v1"
MODEL_MAGIC = "#ssma-model"
MODEL_VERSION = (1, 0)


def fmt(x: float) -> str:
    """Shortest decimal string that reads back to the same double."""
    return repr(float(x))


@contextlib.contextmanager
def _open_out(target):
    if target in (None, "-"):
        yield sys.stdout
    elif isinstance(target, _io.TextIOBase) or hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="\n") as fh:
            yield fh


def _read_text(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text()


# -- datasets --------------------------------------------------------------------


def format_dataset(ds: MultiDomainDataset) -> str:
    for dom in ds.domains:
        if "," in dom.id or not dom.id.strip():
            raise DataError(f"domain id {dom.id!r} cannot be written (empty or contains a comma)")
    lines = [
        f"{DATASET_MAGIC} {DATASET_VERSION}; domains={len(ds)}; "
        f"dims={','.join(map(str, ds.dims))}; classes={ds.class_count}"
    ]
    for dom in ds.domains:
        for j in range(dom.n_samples):
            label = str(int(dom.labels[j])) if dom.labeled[j] else ""
            lines.append(",".join([dom.id, label] + [fmt(v) for v in dom.features[:, j]]))
    return "\n".join(lines) + "\n"


def write_dataset(ds: MultiDomainDataset, target) -> None:
    with _open_out(target) as fh:
        fh.write(format_dataset(ds))


def _parse_header(line: str, where: str) -> dict:
    head, _, rest = line.partition(";")
    parts = head.split()
    if len(parts) != 2 or parts[0] != DATASET_MAGIC:
        raise DataError(f"{where}:1: expected header '{DATASET_MAGIC} {DATASET_VERSION}; ...'")
    if parts[1] != DATASET_VERSION:
        raise DataError(f"{where}:1: unsupported dataset version {parts[1]!r}")
    fields = {}
    for item in rest.split(";"):
        key, eq, value = item.strip().partition("=")
        if not eq:
            raise DataError(f"{where}:1: malformed header field {item.strip()!r}")
        fields[key.strip()] = value.strip()
    try:
        m = int(fields["domains"])
        dims = [int(v) for v in fields["dims"].split(",")]
        C = int(fields["classes"])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{where}:1: header needs integer fields domains, dims, classes ({exc})") from None
    if len(dims) != m:
        raise DataError(f"{where}:1: {m} domains but {len(dims)} dims")
    return {"domains": m, "dims": dims, "classes": C}


def parse_dataset(text: str, where: str = "<dataset>") -> MultiDomainDataset:
    lines = text.splitlines()
    if not lines:
        raise DataError(f"{where}: empty file")
    header = _parse_header(lines[0], where)
    order, feats, labels = [], {}, {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) < 3:
            raise DataError(f"{where}:{lineno}: expected 'domain_id,label,f1,...'")
        dom_id, label = cells[0].strip(), cells[1].strip()
        if dom_id not in feats:
            if len(order) == header["domains"]:
                raise DataError(f"{where}:{lineno}: more domains than the {header['domains']} declared")
            order.append(dom_id)
            feats[dom_id], labels[dom_id] = [], []
        want = header["dims"][order.index(dom_id)]
        if len(cells) - 2 != want:
            raise DataError(f"{where}:{lineno}: domain {dom_id!r} declares {want} features, row has {len(cells) - 2}")
        try:
            feats[dom_id].append([float(v) for v in cells[2:]])
            labels[dom_id].append(int(label) if label else None)
        except ValueError as exc:
            raise DataError(f"{where}:{lineno}: {exc}") from None
        if labels[dom_id][-1] is not None and not 1 <= labels[dom_id][-1] <= header["classes"]:
            raise DataError(f"{where}:{lineno}: label {label} outside 1..{header['classes']}")
    if len(order) != header["domains"]:
        raise DataError(f"{where}: header declares {header['domains']} domains, found {len(order)}")
    domains = [DomainDataset(d, np.array(feats[d]).T, labels[d]) for d in order]
    return MultiDomainDataset(tuple(domains), header["classes"])


def read_dataset(source) -> MultiDomainDataset:
    where = str(getattr(source, "name", source))
    return parse_dataset(_read_text(source), where)


# -- models ----------------------------------------------------------------------


def _matrix_block(name: str, M) -> list:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    out = [f"matrix {name} {M.shape[0]} {M.shape[1]}"]
    out += [" ".join("%.17g" % v for v in row) for row in M]
    return out


def format_model(model: AlignmentModel) -> str:
    lines = [f"{MODEL_MAGIC} v{MODEL_VERSION[0]}.{MODEL_VERSION[1]}"]
    meta = {
        "params": model.params.to_dict(),
        "domains": list(model.domain_ids),
        "domain_dims": list(model.domain_dims),
        "dims": model.dims,
        "ridge_used": model.ridge_used,
        "graph_norms": list(model.graph_norms),
    }
    lines += [f"{k} = {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]
    lines += _matrix_block("eigenvalues", model.eigenvalues[None, :])
    lines += _matrix_block("F", model.F)
    for dom_id, st in zip(model.domain_ids, model.standardization):
        lines += _matrix_block(f"mean:{dom_id}", st.mean[None, :])
        lines += _matrix_block(f"scale:{dom_id}", st.scale[None, :])
    return "\n".join(lines) + "\n"


def write_model(model: AlignmentModel, target) -> None:
    with _open_out(target) as fh:
        fh.write(format_model(model))


def parse_model(text: str, where: str = "<model>") -> AlignmentModel:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MODEL_MAGIC + " v"):
        raise DataError(f"{where}:1: not an ssma model file")
    try:
        major, minor = (int(v) for v in lines[0].split(" v", 1)[1].split("."))
    except ValueError:
        raise DataError(f"{where}:1: malformed model version {lines[0]!r}") from None
    if major > MODEL_VERSION[0]:
        raise DataError(f"{where}: model format v{major}.{minor} is newer than supported v{MODEL_VERSION[0]}.x")
    meta, mats = {}, {}
    i = 1
    while i < len(lines):
        line = lines[i]
        if not line.strip():
            i += 1
            continue
        if line.startswith("matrix "):
            try:
                _, name, r, c = line.split()
                r, c = int(r), int(c)
                rows = [[float(v) for v in lines[i + 1 + k].split()] for k in range(r)]
            except (ValueError, IndexError):
                raise DataError(f"{where}:{i + 1}: malformed matrix block") from None
            M = np.array(rows, dtype=float).reshape(r, c)
            mats[name] = M
            i += 1 + r
            continue
        key, eq, value = line.partition(" = ")
        if not eq:
            raise DataError(f"{where}:{i + 1}: expected 'key = value'")
        try:
            meta[key] = json.loads(value)
        except json.JSONDecodeError as exc:
            raise DataError(f"{where}:{i + 1}: {exc}") from None
        i += 1
    try:
        ids = [str(v) for v in meta["domains"]]
        params = dict(meta["params"])
        params["ridge"] = tuple(params["ridge"])
        return AlignmentModel(
            eigenvalues=mats["eigenvalues"].ravel(),
            F=mats["F"],
            domain_ids=tuple(ids),
            domain_dims=tuple(int(v) for v in meta["domain_dims"]),
            standardization=tuple(
                Standardization(mats[f"mean:{d}"].ravel(), mats[f"scale:{d}"].ravel()) for d in ids
            ),
            params=AlignmentParams.from_dict(params),
            dims=int(meta["dims"]),
            ridge_used=float(meta["ridge_used"]),
            graph_norms=tuple(float(v) for v in meta.get("graph_norms", [])),
        )
    except KeyError as exc:
        raise DataError(f"{where}: missing model entry {exc}") from None


def read_model(source) -> AlignmentModel:
    where = str(getattr(source, "name", source))
    return parse_model(_read_text(source), where)


# -- configs and results ----------------------------------------------------------


def format_config(config: ExperimentConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"


def write_config(config: ExperimentConfig, target) -> None:
    with _open_out(target) as fh:
        fh.write(format_config(config))


def read_config(source) -> ExperimentConfig:
    try:
        data = json.loads(_read_text(source))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(data)


def format_results(result: ExperimentResult) -> str:
    lines = [",".join(RESULT_COLUMNS)]
    for r in result.rows:
        values = [getattr(r, c) for c in RESULT_COLUMNS]
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in values))
    return "\n".join(lines) + "\n"


def write_results(result: ExperimentResult, target) -> None:
    with _open_out(target) as fh:
        fh.write(format_results(result))


def read_results(source) -> ExperimentResult:
    lines = _read_text(source).splitlines()
    if not lines or tuple(lines[0].split(",")) != RESULT_COLUMNS:
        raise DataError(f"results header must be {','.join(RESULT_COLUMNS)}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        v = line.split(",")
        if len(v) != len(RESULT_COLUMNS):
            raise DataError(f"results:{lineno}: expected {len(RESULT_COLUMNS)} columns")
        rows.append(ResultRow(v[0], v[1], v[2], int(v[3]), v[4], int(v[5]), float(v[6]), float(v[7]), int(v[8])))
    return ExperimentResult(rows)


def format_coordinates(rows, n_coords: int, prefix: str, extra=()) -> str:
    """Per-sample table ``sample,domain,label,<prefix>1..,<extra>``."""
    header = ["sample", "domain", "label"] + [f"{prefix}{i}" for i in range(1, n_coords + 1)] + list(extra)
    out = [",".join(header)]
    for sample, dom_id, label, coords in rows:
        out.append(",".join([str(sample), dom_id, "" if label is None else str(label)] + [fmt(v) for v in coords]))
    return "\n".join(out) + "\n"
