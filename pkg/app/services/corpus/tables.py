"""Expected recovery cells per identity and state, one character per dataset file.

Y recovered, D carved from unallocated space, T thumbnail only, "." nothing usable.
"""

from __future__ import annotations

from typing import Dict, Tuple

from app.errors import UncatalogedIdentityError
from app.evidence import AppIdentity, DeviceState, Platform, Provider, RecoveryStatus

RECOVERED = "Y"
CARVED = "D"
THUMBNAIL = "T"
BLANK = "."

_BOX_IOS = "TYTT.Y...Y...Y...Y.."

# (active power state, cache cleared); powered-down states repeat these columns
EXPECTED_CELLS: Dict[Tuple[Provider, Platform, str], Tuple[str, str]] = {
    (Provider.DROPBOX, Platform.ANDROID, "2.1.3"): (
        "TYTT.Y...Y..YY.DYY.D",
        "TYTT.Y...Y..DY.DDY.D",
    ),
    (Provider.DROPBOX, Platform.ANDROID, "2.2.2"): (
        "TYTT.Y...Y..YY.DYY.D",
        "TYTT.Y...Y..DY.DDY.D",
    ),
    (Provider.DROPBOX, Platform.IOS, "1.4.7"): (
        "TYT..Y...Y..YY..YY..",
        ".Y...Y...Y...Y...Y..",
    ),
    (Provider.BOX, Platform.ANDROID, "1.6.7"): (
        "YYTYYY.YYY.YYY.YYY.Y",
        "DDTDDD.DDD.DDD.DDD.D",
    ),
    (Provider.BOX, Platform.ANDROID, "2.0.2"): (
        "TTTTYY.YYY.Y........",
        "TTTT...DDD.D........",
    ),
    (Provider.BOX, Platform.IOS, "2.7.1"): (_BOX_IOS, _BOX_IOS),
    (Provider.SUGARSYNC, Platform.ANDROID, "3.6"): (
        "YYTY.Y...Y..YY.YYY.Y",
        "DYTD.Y...Y..YY.YDY.D",
    ),
    (Provider.SUGARSYNC, Platform.ANDROID, "3.6.2"): (
        "YYTY.Y...Y..YY.YYY.Y",
        "DYTD.Y...Y..YY.YDY.D",
    ),
    (Provider.SUGARSYNC, Platform.IOS, "3.0"): (
        "YY.YYY.YYY.YYY.YYY.Y",
        ".Y..YY.Y.Y...Y...Y..",
    ),
    (Provider.SYNCPLICITY, Platform.ANDROID, "1.7"): (
        "TYTT.Y...Y...Y..DY.D",
        ".Y...Y...Y...Y..DY.D",
    ),
    (Provider.SYNCPLICITY, Platform.ANDROID, "2.1.1"): (
        "YYTYYY.YYY.YYY.YYY..",
        "DY.DDY.DDY.DDY.DDY..",
    ),
    (Provider.SYNCPLICITY, Platform.IOS, "1.6"): (
        "YY.YYY.YYY..YY.YYY.Y",
        "....................",
    ),
}

# the Syncplicity matrix is only partly legible in the source study; these
# columns were rebuilt from the per-device union sets and the prose
RECONSTRUCTED = frozenset({Provider.SYNCPLICITY})

# (older Android, newer Android, iOS) devices whose active-state snapshots are merged
MERGE_TRIPLES: Dict[Provider, Tuple[AppIdentity, AppIdentity, AppIdentity]] = {
    Provider.DROPBOX: (
        AppIdentity(Provider.DROPBOX, Platform.ANDROID, "2.1.3"),
        AppIdentity(Provider.DROPBOX, Platform.ANDROID, "2.2.2"),
        AppIdentity(Provider.DROPBOX, Platform.IOS, "1.4.7"),
    ),
    Provider.BOX: (
        AppIdentity(Provider.BOX, Platform.ANDROID, "1.6.7"),
        AppIdentity(Provider.BOX, Platform.ANDROID, "2.0.2"),
        AppIdentity(Provider.BOX, Platform.IOS, "2.7.1"),
    ),
    Provider.SUGARSYNC: (
        AppIdentity(Provider.SUGARSYNC, Platform.ANDROID, "3.6"),
        AppIdentity(Provider.SUGARSYNC, Platform.ANDROID, "3.6.2"),
        AppIdentity(Provider.SUGARSYNC, Platform.IOS, "3.0"),
    ),
    Provider.SYNCPLICITY: (
        AppIdentity(Provider.SYNCPLICITY, Platform.ANDROID, "1.7"),
        AppIdentity(Provider.SYNCPLICITY, Platform.ANDROID, "2.1.1"),
        AppIdentity(Provider.SYNCPLICITY, Platform.IOS, "1.6"),
    ),
}

EXPECTED_UNION: Dict[Provider, int] = {
    Provider.DROPBOX: 9,
    Provider.BOX: 15,
    Provider.SUGARSYNC: 15,
    Provider.SYNCPLICITY: 15,
}


def expected_column(identity: AppIdentity, state: DeviceState) -> str:
    key = (identity.provider, identity.platform, identity.app_version)
    if key not in EXPECTED_CELLS:
        raise UncatalogedIdentityError(f"no expected results for {identity.label}")
    active, cleared = EXPECTED_CELLS[key]
    return cleared if state.cache_cleared else active


def cell_for_status(status: RecoveryStatus) -> str:
    if status is RecoveryStatus.CARVED_DELETED:
        return CARVED
    if status.recovered:
        return RECOVERED
    if status is RecoveryStatus.THUMBNAIL_ONLY:
        return THUMBNAIL
    return BLANK


__all__ = [
    "BLANK",
    "CARVED",
    "EXPECTED_CELLS",
    "EXPECTED_UNION",
    "MERGE_TRIPLES",
    "RECONSTRUCTED",
    "RECOVERED",
    "THUMBNAIL",
    "cell_for_status",
    "expected_column",
]
