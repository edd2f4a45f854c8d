from __future__ import annotations

# Domain errors. Everything derives from ValueError so callers that only know
# about ValueError (the convention across this package) still catch them.


class ScenarioError(ValueError):
    """Malformed scenario text or structure (parse-time)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class ScenarioInvalid(ValueError):
    """Raised by entry points that refuse to run a scenario with violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        codes = ", ".join(sorted({v.code for v in self.violations}))
        super().__init__(f"scenario has {len(self.violations)} violation(s): {codes}")


class UnknownPreset(ValueError):
    pass


class SubnetExhausted(ValueError):
    pass


class UnknownInterface(KeyError, ValueError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else "unknown interface"


class AlreadyAttached(ValueError):
    pass


class PcapFormatError(ValueError):
    """Malformed capture file; `offset` is the byte position of the problem."""

    def __init__(self, message: str, path=None, offset: int | None = None):
        self.path = path
        self.offset = offset
        where = f"{path}" if path is not None else "pcap"
        if offset is not None:
            where += f" @ byte {offset}"
        super().__init__(f"{where}: {message}")


class BadMagic(PcapFormatError):
    pass


class TruncatedRecord(PcapFormatError):
    pass


class FlowLabelConflict(ValueError):
    pass


class TransferError(ValueError):
    pass
