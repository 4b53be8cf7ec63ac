# Copyright 2026 The stopaudit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Stop-request audit simulator."""

import json

from . import _stopaudit
from ._stopaudit import (
    MODULUS,
    DataError,
    Error,
    IntegrityError,
    Platform,
    build_similarity,
    decode_fixed,
    encode_fixed,
    lemma_check,
    mpc_build_similarity,
    overlap_check,
    parse_records,
    reconstruct,
    serialize_records,
    sha256_hex,
    share,
    synthesize,
)


def _config_text(config):
    return config if isinstance(config, str) else json.dumps(config)


def sparsity_stats(records, users=None, items=None):
    return json.loads(_stopaudit.sparsity_stats(records, users, items))


def run_experiment(config):
    """Replays and audits each community fraction of `config` (dict or JSON)."""
    return json.loads(_stopaudit.run_experiment(_config_text(config)))


def audit_bundle(config, fraction):
    """Evidence, chain, entries and verdict of the first audited victim.

    Returns None when no victim produced evidence.
    """
    return json.loads(_stopaudit.audit_bundle(_config_text(config), fraction))


def report(table, config):
    """CSV text of one report table."""
    return _stopaudit.report(table, _config_text(config))


def judge_verify(evidence, chain, entries_jsonl, metadata_s):
    """Verdict dict for evidence and a ledger export.

    `evidence` and `chain` may be parsed JSON or text.
    """
    return json.loads(
        _stopaudit.judge_verify(
            _config_text(evidence), _config_text(chain), entries_jsonl, metadata_s
        )
    )


__all__ = [
    "MODULUS",
    "DataError",
    "Error",
    "IntegrityError",
    "Platform",
    "audit_bundle",
    "build_similarity",
    "decode_fixed",
    "encode_fixed",
    "judge_verify",
    "lemma_check",
    "mpc_build_similarity",
    "overlap_check",
    "parse_records",
    "reconstruct",
    "report",
    "run_experiment",
    "serialize_records",
    "sha256_hex",
    "share",
    "sparsity_stats",
    "synthesize",
]
