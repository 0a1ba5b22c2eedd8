"""
Global limit on heavy solver work running inside the API process.

GA batches and Held–Karp runs are CPU-bound (a batch may already fan out to a
process pool), so the HTTP layer admits at most
``settings.api_max_concurrent_batches`` of them at a time.  Requests beyond
that wait for a free slot.

Usage
-----
    from app.workers.slots import batch_slots

    async with batch_slots:
        records = await asyncio.to_thread(run_batch, inst, cfg, runs)
"""

import asyncio

from app.config import settings

# Created once, shared across the process.
batch_slots: asyncio.Semaphore = asyncio.Semaphore(
    max(1, settings.api_max_concurrent_batches)
)
