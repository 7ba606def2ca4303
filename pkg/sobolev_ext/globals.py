import logging
import os
import subprocess
from typing import Union

import numpy as np

from .config import Config
from .utils.lru_cache import LRUCache


class Global:
    """
    A singleton class holding global states.
    """

    version: Union[str, None] = None

    # Seeded generator shared by every sampling step of a run
    rng: np.random.Generator = np.random.default_rng(0)

    # Covers and plans keyed by (domain description, j_max, ...)
    cover_cache = LRUCache(8)


def initialize_global():
    commit_hash = get_git_commit_hash()
    if commit_hash:
        Global.version = commit_hash[:8]

    reset_rng()
    Global.cover_cache.clear()

    logging.basicConfig(
        level=logging.DEBUG if Config.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")


def reset_rng(seed: Union[int, None] = None) -> np.random.Generator:
    Global.rng = np.random.default_rng(Config.seed if seed is None else seed)
    return Global.rng


def get_package_dir():
    current_file_path = os.path.abspath(__file__)
    parent_directory_path = os.path.dirname(current_file_path)
    return os.path.abspath(parent_directory_path)


def get_git_commit_hash():
    try:
        commit_hash = subprocess.check_output(
            ['git', 'rev-parse', 'HEAD'],
            cwd=get_package_dir(),
            stderr=subprocess.DEVNULL).strip().decode('utf-8')
        return commit_hash
    except Exception as e:
        print(f"Notice: cannot get git commit hash: {e}")
        return None
