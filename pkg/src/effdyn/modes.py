from enum import Enum


class DriveMode(str, Enum):
    """Direction of power flow through a transmission."""

    FORWARD = "forward"    # motor drives the load
    BACKWARD = "backward"  # load back-drives the motor
    IDEAL = "ideal"        # lossless limit

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown drive mode {value!r}; expected one of "
                             f"{[m.value for m in cls]}") from None
