# app/core/core_types.py - Shared vocabulary of the Mermin device
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Tuple, Union

from app.core.errors import InvalidSettingError


class Setting(IntEnum):
    """Detector dial position. Each position is a coplanar magnet orientation."""

    ONE = 1
    TWO = 2
    THREE = 3

    @classmethod
    def parse(cls, value: Union[int, str, "Setting"]) -> "Setting":
        try:
            setting = cls(int(value))
        except (TypeError, ValueError, OverflowError):
            raise InvalidSettingError(f"Detector setting must be 1, 2 or 3, got {value!r}")
        # int() truncates 1.7 to 1
        if not isinstance(value, str) and setting != value:
            raise InvalidSettingError(f"Detector setting must be a whole number, got {value!r}")
        return setting

    @property
    def angle(self) -> "Angle":
        return Angle(SETTING_ANGLES[self])

    def __str__(self) -> str:
        return str(self.value)


# Setting 1 -> 0 deg, 2 -> 120 deg, 3 -> -120 deg
SETTING_ANGLES = {Setting.ONE: 0, Setting.TWO: 120, Setting.THREE: -120}


@dataclass(frozen=True, order=True)
class Angle:
    degrees: int

    def normalized(self) -> "Angle":
        """Fold into [0, 180]; theta and 360 - theta describe the same relative angle."""
        folded = abs(self.degrees) % 360
        if folded > 180:
            folded = 360 - folded
        return Angle(folded)

    def __str__(self) -> str:
        return f"{self.degrees}°"


class Color(str, Enum):
    R = "R"
    G = "G"

    def mirror(self) -> "Color":
        return Color.G if self is Color.R else Color.R

    @property
    def sign(self) -> int:
        return 1 if self is Color.R else -1

    def __str__(self) -> str:
        return self.value


class CaseLabel(str, Enum):
    A = "a"
    B = "b"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class SettingPair:
    """Ordered (Alice, Bob) settings, indexed 1-9 as 11, 12, 13, 21, 22, 23, 31, 32, 33."""

    alice: Setting
    bob: Setting

    def __post_init__(self):
        object.__setattr__(self, "alice", Setting.parse(self.alice))
        object.__setattr__(self, "bob", Setting.parse(self.bob))

    @property
    def index(self) -> int:
        return 3 * (self.alice - 1) + self.bob

    @property
    def label(self) -> str:
        return f"{int(self.alice)}{int(self.bob)}"

    @property
    def case(self) -> CaseLabel:
        return classify(self)

    @property
    def theta(self) -> Angle:
        return settings_to_theta(self.alice, self.bob)

    def swapped(self) -> "SettingPair":
        return SettingPair(self.bob, self.alice)

    @classmethod
    def from_index(cls, index: int) -> "SettingPair":
        if not isinstance(index, int) or not 1 <= index <= 9:
            raise InvalidSettingError(f"Setting pair index must be 1-9, got {index!r}")
        alice, bob = divmod(index - 1, 3)
        return cls(Setting(alice + 1), Setting(bob + 1))

    @classmethod
    def from_label(cls, label: str) -> "SettingPair":
        text = str(label).strip()
        if len(text) != 2:
            raise InvalidSettingError(f"Setting pair label must look like '23', got {label!r}")
        return cls(Setting.parse(text[0]), Setting.parse(text[1]))

    def __str__(self) -> str:
        return self.label


def settings_to_theta(a: Setting, b: Setting) -> Angle:
    """Relative angle between Alice's and Bob's magnets: 0 for case (a), 120 for case (b)."""
    delta = SETTING_ANGLES[Setting.parse(a)] - SETTING_ANGLES[Setting.parse(b)]
    return Angle(delta).normalized()


def classify(pair: SettingPair) -> CaseLabel:
    return CaseLabel.A if pair.alice == pair.bob else CaseLabel.B


ALL_PAIRS: Tuple[SettingPair, ...] = tuple(SettingPair.from_index(i) for i in range(1, 10))
PAIR_LABELS: Tuple[str, ...] = tuple(p.label for p in ALL_PAIRS)
CASE_A_PAIRS: Tuple[SettingPair, ...] = tuple(p for p in ALL_PAIRS if p.case is CaseLabel.A)
CASE_B_PAIRS: Tuple[SettingPair, ...] = tuple(p for p in ALL_PAIRS if p.case is CaseLabel.B)
