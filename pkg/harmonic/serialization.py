"""
JSON and flat binary encodings of the library's data objects.

Field layout: row-major lattice index s, then the n x n matrix in row-major order, each
entry a (re, im) pair. The binary form is a little-endian uint32 header length, the UTF-8
JSON header, then the complex128 payload.
"""

import json
from fractions import Fraction
from typing import Any, Dict

import numpy as np

from .exceptions import ShapeError
from .opfield import GridSpec, OperatorField

FIELD_LAYOUT = "row-major s-index, then n×n row-major complex (re,im) pairs"


def field_header(field: OperatorField) -> Dict[str, Any]:
    return {
        'd': field.grid.d,
        'N': field.grid.N,
        'n': field.n,
        'hermitian': field.hermitian,
        'layout': FIELD_LAYOUT,
    }


def _grid_from_header(header: Dict[str, Any]) -> GridSpec:
    try:
        return GridSpec(int(header['d']), int(header['N']))
    except KeyError as exc:
        raise ShapeError(f"Field header is missing {exc}.") from exc


def field_to_json(field: OperatorField) -> str:
    flat = field.flat().reshape(-1)
    payload = dict(field_header(field))
    payload['values'] = np.stack([flat.real, flat.imag], axis=-1).tolist()
    return json.dumps(payload)


def field_from_json(text: str) -> OperatorField:
    payload = json.loads(text)
    grid = _grid_from_header(payload)
    n = int(payload['n'])
    pairs = np.asarray(payload['values'], dtype=float)
    if pairs.shape != (grid.size * n * n, 2):
        raise ShapeError(
            f"Expected {grid.size * n * n} (re, im) pairs, got array of shape {pairs.shape}.")
    values = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(grid.shape + (n, n))
    return OperatorField(grid, values, hermitian=bool(payload.get('hermitian', False)))


def field_to_bytes(field: OperatorField) -> bytes:
    header = json.dumps(field_header(field)).encode('utf-8')
    length = np.array([len(header)], dtype='<u4').tobytes()
    return length + header + field.flat().astype('<c16').tobytes()


def field_from_bytes(blob: bytes) -> OperatorField:
    if len(blob) < 4:
        raise ShapeError("Binary field is truncated before its header.")
    length = int(np.frombuffer(blob[:4], dtype='<u4')[0])
    header = json.loads(blob[4:4 + length].decode('utf-8'))
    grid = _grid_from_header(header)
    n = int(header['n'])
    data = np.frombuffer(blob[4 + length:], dtype='<c16')
    if data.size != grid.size * n * n:
        raise ShapeError(f"Binary payload has {data.size} entries, expected {grid.size * n * n}.")
    return OperatorField(grid, data.reshape(grid.shape + (n, n)),
                         hermitian=bool(header.get('hermitian', False)))


def qt_to_json(element) -> str:
    """QTElement as {d, theta: [["p/q", ...], ...], coeffs: [{m, re, im}, ...]}."""
    theta = element.theta
    payload = {
        'd': theta.d,
        'theta': [[str(Fraction(v)) for v in row] for row in theta.entries],
        'coeffs': [
            {'m': list(m), 're': float(c.real), 'im': float(c.imag)}
            for m, c in sorted(element.coeffs.items())
        ],
    }
    return json.dumps(payload)


def qt_from_json(text: str):
    from .quantum_torus import QTElement, Theta

    payload = json.loads(text)
    theta = Theta([[Fraction(v) for v in row] for row in payload['theta']])
    if theta.d != int(payload['d']):
        raise ShapeError(f"Theta is {theta.d}x{theta.d} but header says d={payload['d']}.")
    coeffs = {tuple(int(v) for v in item['m']): complex(item['re'], item['im'])
              for item in payload['coeffs']}
    return QTElement(theta, coeffs)
