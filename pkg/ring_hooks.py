#!/usr/bin/env python3
"""
Lifecycle Hooks for Scans and Propagation
=========================================

Scans and ramps report progress through strands hook events instead of
printing. Callers register callbacks for the events they care about:

1. Direct callbacks:   registry.add_callback(ScanPointEvent, my_callback)
2. HookProvider:       an object registering several related callbacks at once

Events (strands BaseHookEvent subclasses, read-only once built):
- BeforeScanEvent / ScanPointEvent / AfterScanEvent
- PropagationStepEvent / AfterPropagationEvent

Bundled providers:
- ScanProgressHook: rich progress bar over the grid
- NormMonitorHook: tracks the worst norm drift of a ramp
"""

import logging
from dataclasses import dataclass
from typing import Any, Iterable, Optional

from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from strands.hooks import BaseHookEvent, HookProvider, HookRegistry

from ring_utils import NORM_DRIFT_TARGET, get_console

logger = logging.getLogger(__name__)


# ============================================================================
# Events
# ============================================================================

@dataclass
class BeforeScanEvent(BaseHookEvent):
    total: int
    n_sites: int
    model: str


@dataclass
class ScanPointEvent(BaseHookEvent):
    index: int
    total: int
    record: Any


@dataclass
class AfterScanEvent(BaseHookEvent):
    diagram: Any


@dataclass
class PropagationStepEvent(BaseHookEvent):
    step: int
    time: float
    norm_drift: float


@dataclass
class AfterPropagationEvent(BaseHookEvent):
    trajectory: Any


# ============================================================================
# Registry
# ============================================================================

def build_registry(hooks: Optional[Iterable[HookProvider]] = None) -> HookRegistry:
    """strands HookRegistry with every provider in `hooks` already registered."""
    registry = HookRegistry()
    for provider in hooks or ():
        registry.add_hook(provider)
    return registry


def emit(registry: HookRegistry, event: BaseHookEvent) -> None:
    """Run the callbacks registered for `event` on the calling thread."""
    registry.invoke_callbacks(event)


# ============================================================================
# Bundled Providers
# ============================================================================

class ScanProgressHook(HookProvider):
    """Rich progress bar that advances once per finished grid point."""

    def __init__(self, console=None, description: str = "Scanning"):
        self.console = console or get_console(stderr=True)
        self.description = description
        self._progress: Optional[Progress] = None
        self._task = None

    def register_hooks(self, registry: HookRegistry, **kwargs: Any) -> None:
        registry.add_callback(BeforeScanEvent, self.start)
        registry.add_callback(ScanPointEvent, self.advance)
        registry.add_callback(AfterScanEvent, self.stop)

    def start(self, event: BeforeScanEvent) -> None:
        self._progress = Progress(
            TextColumn("[bold]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        )
        self._progress.start()
        label = f"{self.description} {event.model} ({event.n_sites} sites)"
        self._task = self._progress.add_task(label, total=event.total)

    def advance(self, event: ScanPointEvent) -> None:
        if self._progress is not None:
            self._progress.update(self._task, completed=event.index + 1)

    def stop(self, event: AfterScanEvent) -> None:
        if self._progress is not None:
            self._progress.stop()
            self._progress = None


class NormMonitorHook(HookProvider):
    """Keeps the worst |‖ψ‖ − 1| seen during a ramp; warns above 1e−6."""

    def __init__(self, threshold: float = NORM_DRIFT_TARGET):
        self.threshold = threshold
        self.worst_drift = 0.0
        self.worst_time = 0.0

    def register_hooks(self, registry: HookRegistry, **kwargs: Any) -> None:
        registry.add_callback(PropagationStepEvent, self.record_step)
        registry.add_callback(AfterPropagationEvent, self.report)

    def record_step(self, event: PropagationStepEvent) -> None:
        if event.norm_drift > self.worst_drift:
            self.worst_drift = event.norm_drift
            self.worst_time = event.time

    def report(self, event: AfterPropagationEvent) -> None:
        if self.worst_drift > self.threshold:
            logger.warning(
                "norm drift %.2e at t=%.4g exceeds %.0e; consider a smaller dt",
                self.worst_drift, self.worst_time, self.threshold,
            )
        else:
            logger.info("worst norm drift %.2e (t=%.4g)", self.worst_drift, self.worst_time)


__all__ = [
    "BeforeScanEvent",
    "ScanPointEvent",
    "AfterScanEvent",
    "PropagationStepEvent",
    "AfterPropagationEvent",
    "HookRegistry",
    "HookProvider",
    "build_registry",
    "emit",
    "ScanProgressHook",
    "NormMonitorHook",
]
