# -*- coding: utf-8 -*-
"""
Checkpoint file layout:

    b'PLNKCKPT'  magic
    uint64 LE    header length in bytes
    header       UTF-8 JSON: format version, config hash, node tokens, metadata,
                 and per parameter its name, shape and byte offset into the data block
    data block   raw little-endian float64 arrays, row-major, back to back
"""
import json
import struct
from collections import namedtuple

import numpy as np

from utils.diffmath_util import ParameterStore
from utils.error_util import CompatibilityError, FormatError
from utils.other_utils import atomic_open, logger

MAGIC = b'PLNKCKPT'
FORMAT_VERSION = 1
LENGTH = struct.Struct('<Q')
FLOAT = np.dtype('<f8')

Checkpoint = namedtuple('Checkpoint', ['store', 'node_tokens', 'config_hash', 'metadata'])


def save_checkpoint(path, store, node_tokens=None, config_hash=None, metadata=None):
    entries = []
    offset = 0
    for name, p in store.items():
        entries.append({'name': name, 'shape': list(p.shape), 'offset': offset})
        offset += p.data.size * FLOAT.itemsize
    header = {
        'version': FORMAT_VERSION,
        'config_hash': config_hash,
        'node_tokens': list(node_tokens) if node_tokens is not None else None,
        'metadata': metadata or {},
        'params': entries,
        'data_bytes': offset,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode('utf8')
    with atomic_open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(LENGTH.pack(len(header_bytes)))
        f.write(header_bytes)
        for _, p in store.items():
            f.write(np.ascontiguousarray(p.data, dtype=FLOAT).tobytes())
    logger.info(f'Saved checkpoint with {len(store)} parameters into [{path}]')


def load_checkpoint(path, expected_hash=None, force=False):
    """
    :param expected_hash: config hash the caller runs under; a mismatch raises CompatibilityError
    :param force: load despite a hash mismatch
    """
    with open(path, 'rb') as f:
        raw = f.read()
    if len(raw) < len(MAGIC) + LENGTH.size or raw[:len(MAGIC)] != MAGIC:
        raise FormatError(f'[{path}] is not a checkpoint file')
    pos = len(MAGIC)
    (header_len,) = LENGTH.unpack_from(raw, pos)
    pos += LENGTH.size
    if pos + header_len > len(raw):
        raise FormatError(f'[{path}] is truncated inside the header')
    try:
        header = json.loads(raw[pos:pos + header_len].decode('utf8'))
        entries = header['params']
        data_bytes = header['data_bytes']
    except (ValueError, KeyError, TypeError) as e:
        raise FormatError(f'[{path}] has a corrupt header: {e}')
    if header.get('version') != FORMAT_VERSION:
        raise FormatError(f'[{path}] has unsupported format version {header.get("version")}')
    pos += header_len
    data = raw[pos:]
    if len(data) != data_bytes:
        raise FormatError(f'[{path}] is truncated: expected {data_bytes} data bytes, found {len(data)}')

    if expected_hash is not None and header.get('config_hash') != expected_hash:
        msg = f'[{path}] was saved under config hash {header.get("config_hash")}, current config is {expected_hash}'
        if not force:
            raise CompatibilityError(msg)
        logger.warning(msg + ', loading anyway')

    store = ParameterStore()
    for entry in entries:
        shape = tuple(entry['shape'])
        size = int(np.prod(shape)) * FLOAT.itemsize
        start = entry['offset']
        if start < 0 or start + size > len(data):
            raise FormatError(f'[{path}] parameter {entry["name"]} lies outside the data block')
        values = np.frombuffer(data, dtype=FLOAT, count=int(np.prod(shape)), offset=start).reshape(shape)
        store.add(entry['name'], values.astype(np.float64))
    return Checkpoint(store, header.get('node_tokens'), header.get('config_hash'), header.get('metadata', {}))


def checkpoint_io(store, path, direction, **kwargs):
    if direction == 'save':
        return save_checkpoint(path, store, **kwargs)
    if direction == 'load':
        return load_checkpoint(path, **kwargs)
    raise ValueError(f'direction must be save or load, got [{direction}]')
