from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, runtime_checkable

if TYPE_CHECKING:
    from .packets import Packet
    from .tcp import ConnectionHandle


@runtime_checkable
class Host(Protocol):
    # Anything the fabric can deliver frames to: client pods, victim pods and
    # storage-plane endpoints. The fabric calls receive() at the delivery
    # timestamp; the host reads the clock from the fabric and may inject
    # replies right away.
    def receive(self, p: "Packet") -> None: ...


@runtime_checkable
class ConnectionListener(Protocol):
    # Callbacks a client-side connection reports to (generators implement
    # these). Called in this order over a connection's life:
    #   on_established | on_refused, then on_data*, then on_closed.
    def on_established(self, h: "ConnectionHandle") -> None: ...
    def on_data(self, h: "ConnectionHandle", data: bytes) -> None: ...
    def on_closed(self, h: "ConnectionHandle") -> None: ...
    def on_refused(self, h: "ConnectionHandle") -> None: ...
