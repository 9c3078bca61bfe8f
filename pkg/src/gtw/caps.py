"""Size caps and the soft memory budget.

All potentially explosive operations consult a Caps instance and raise
SizeGuard before allocating. Callers can pass a custom Caps; the module-level
DEFAULT_CAPS picks up the optional GTW_MAX_MEM environment variable (bytes,
with K/M/G suffixes) as a soft memory budget.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .errors import SizeGuard


@dataclass(frozen=True)
class Caps:
    max_poset_enum: int = 5          # enumerate_posets: largest n
    max_subset_scan: int = 1 << 20   # 2^n scans (upsets of a poset, ...)
    max_valuations: int = 1 << 16    # valuation grid per validity check
    max_lattice_check: int = 128     # eager law validation up to this size
    max_pf_scan: int = 4096          # subset-scan budget for prime filters
    pf_shortcut_above: int = 256     # join-irreducible path when 2^|D| > this
    max_cin_size: int = 4            # hard cap on cin carriers
    max_dense_lattice: int = 600     # dense-table lattices (oracle) up to this
    oracle_box_max: int = 8          # free-lattice oracle caps per kind
    oracle_im_max: int = 4
    oracle_cin_max: int = 3
    universe_box_max: int = 4        # largest requestable n per kind
    universe_si_max: int = 4
    universe_im_max: int = 3
    universe_cin_max: int = 3
    universe_cin_exhaustive_max: int = 1  # beyond this, cin needs sampling
    universe_cin_samples: int = 48   # sampled cin structures per poset
    max_map_search: int = 1 << 20    # map-enumeration budget per search
    max_subalgebra: int = 8          # carrier bound for the subalgebra scan
    max_dual_points: int = 1 << 17   # l_dual_points carrier cap
    max_poset_order: int = 4096      # largest poset materialized with order rows
    mem_budget: int | None = None    # soft budget in bytes (GTW_MAX_MEM)

    def with_overrides(self, **kw) -> "Caps":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _parse_mem(text: str) -> int | None:
    text = text.strip().upper()
    if not text:
        return None
    mult = 1
    if text[-1] in "KMG":
        mult = {"K": 1 << 10, "M": 1 << 20, "G": 1 << 30}[text[-1]]
        text = text[:-1]
    try:
        return int(float(text) * mult)
    except ValueError:
        return None


def caps_from_env() -> Caps:
    caps = Caps()
    budget = _parse_mem(os.environ.get("GTW_MAX_MEM", ""))
    if budget is not None:
        caps = replace(caps, mem_budget=budget)
        # Under a tight budget, shrink the scan-shaped caps proportionally.
        if budget < 256 << 20:
            factor = max(1, (256 << 20) // max(budget, 1))
            caps = replace(
                caps,
                max_subset_scan=max(1 << 10, caps.max_subset_scan // factor),
                max_map_search=max(1 << 10, caps.max_map_search // factor),
                max_dual_points=max(1 << 8, caps.max_dual_points // factor),
            )
    return caps


DEFAULT_CAPS = caps_from_env()


def guard(what: str, required: int, cap: int) -> None:
    if required > cap:
        raise SizeGuard(what, required, cap)


def ensure_budget(caps: Caps, nbytes: int, what: str) -> None:
    """Soft memory check: refuse allocations beyond the configured budget."""
    if caps.mem_budget is not None and nbytes > caps.mem_budget:
        raise SizeGuard(f"{what} (memory)", nbytes, caps.mem_budget)
