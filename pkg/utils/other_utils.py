# !/usr/bin/env python3
# -*- coding:utf8 -*-
import logging
import os
import uuid
import colorlog
import chardet
from contextlib import contextmanager


# create a logger
logger = logging.getLogger('pairlink')
logger.setLevel(logging.INFO)

# set logger color
log_colors_config = {
    'DEBUG': 'bold_purple',
    'INFO': 'bold_green',
    'WARNING': 'bold_yellow',
    'ERROR': 'bold_red',
    'CRITICAL': 'red',
}

# set logger format
console_format = colorlog.ColoredFormatter(
    "[%(asctime)s] [%(module)s:%(funcName)s] [%(lineno)d] [%(levelname)s] %(log_color)s%(message)s",
    log_colors=log_colors_config
)

# add console handler
if not logger.handlers:
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(console_format)
    logger.addHandler(console_handler)


def create_unique_file(filename, path=None):
    result_file = filename + '_' + str(uuid.uuid4())
    if path:
        result_file = os.path.join(path, result_file)
    return result_file


@contextmanager
def atomic_open(filename, mode='wb'):
    """Write into a sibling temp file and move it over `filename` only when the block succeeds."""
    tmp_file = create_unique_file(os.path.basename(filename) + '.tmp', os.path.dirname(os.path.abspath(filename)))
    f = open(tmp_file, mode)
    try:
        yield f
        f.close()
        os.replace(tmp_file, filename)
    finally:
        if not f.closed:
            f.close()
        if os.path.exists(tmp_file):
            os.remove(tmp_file)


def decode_bytes(value: bytes) -> str:
    if not value:
        return ''
    try:
        return value.decode('utf8')
    except UnicodeDecodeError:
        pass

    encoding = chardet.detect(value).get('encoding', '')
    if not encoding:
        encoding = 'utf8'
    logger.debug(f'Detected file encoding: [{encoding}]')
    return value.decode(encoding, errors='replace')


def read_text_lines(filename):
    """Read a text file of unknown encoding into a list of lines without line endings."""
    if not os.path.exists(filename):
        raise FileNotFoundError(filename + ' does not exist')

    with open(filename, 'rb') as f:
        return decode_bytes(f.read()).splitlines()
