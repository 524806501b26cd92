"""Binary arm groups: log2(K) membership sets with Hamming-style decoding.

Arm i belongs to group k exactly when bit k of (i-1) is set, counting bit 1
as the least significant place. The m-bit membership pattern of an arm is
therefore the binary expansion of (i-1), which makes decoding a detection
vector a base-2 read-off. Non-power-of-two arm counts are padded with dummy
arms so every group has exactly K_padded/2 members.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DecodedDummyArm, IndexOutOfRange, InvalidK


@dataclass(frozen=True)
class GroupCode:
    K_orig: int
    K_padded: int
    m: int
    groups: tuple[frozenset[int], ...]
    dummy_arms: frozenset[int]


def construct_groups(K: int) -> GroupCode:
    """Build the log2(K_padded) groups over a possibly padded arm set.

    Raises InvalidK for K < 2.
    """
    if K < 2:
        raise InvalidK(f"need K >= 2, got {K}")
    K_padded = 2 ** (K - 1).bit_length()
    m = K_padded.bit_length() - 1
    groups = tuple(
        frozenset(i for i in range(1, K_padded + 1) if (i - 1) >> k & 1)
        for k in range(m)
    )
    dummy_arms = frozenset(range(K + 1, K_padded + 1))
    return GroupCode(
        K_orig=K, K_padded=K_padded, m=m, groups=groups, dummy_arms=dummy_arms
    )


def detection_pattern(code: GroupCode, arm: int) -> tuple[int, ...]:
    """Membership bits of an arm across the m groups (binary digits of arm-1)."""
    if not 1 <= arm <= code.K_padded:
        raise IndexOutOfRange(f"arm {arm} outside [1, {code.K_padded}]")
    return tuple((arm - 1) >> k & 1 for k in range(code.m))


def decode_best_arm(code: GroupCode, detections) -> int:
    """Invert detection_pattern: 1 + the integer spelled by the detection bits.

    Raises DecodedDummyArm when the decoded index is a padding arm, which
    signals that at least one group test failed on a padded instance.
    """
    detections = tuple(int(b) for b in detections)
    if len(detections) != code.m:
        raise IndexOutOfRange(
            f"expected {code.m} detection bits, got {len(detections)}"
        )
    if any(b not in (0, 1) for b in detections):
        raise IndexOutOfRange(f"detection bits must be 0/1, got {detections}")
    arm = 1 + sum(b << k for k, b in enumerate(detections))
    if arm in code.dummy_arms:
        raise DecodedDummyArm(arm)
    return arm
