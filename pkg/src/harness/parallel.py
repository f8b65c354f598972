"""Support for running independent training jobs in parallel."""
import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import pandas as pd

from .config import TrainConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunJob:
    """One (variant, held-out, seed, ...) run."""
    key: Tuple
    config: TrainConfig
    held_out: str
    seed: int


class ParallelRunner:
    """
    Runner for executing independent training jobs concurrently.

    Results come back in submission order whatever order the workers finish
    in, so tables built from them do not depend on scheduling.
    """

    def __init__(self, max_workers: Optional[int] = None):
        """
        Args:
            max_workers: Worker processes (default: CPU count); 1 runs inline
        """
        self.max_workers = max_workers
        self.results: List[Dict[str, Any]] = []

    def run_single(self, job: RunJob, job_fn: Callable) -> Dict[str, Any]:
        """
        Run one job, capturing failure instead of raising.

        Args:
            job: Job description
            job_fn: Callable taking the job and returning a dict of results

        Returns:
            Result dict with 'key' and 'success' set
        """
        try:
            result = job_fn(job)
            result['key'] = job.key
            result['success'] = True
            return result
        except Exception as e:
            logger.error(f"Job {job.key} failed: {e}")
            return {'key': job.key, 'success': False, 'error': str(e)}

    def run_parallel(self, jobs: List[RunJob], job_fn: Callable) -> List[Dict[str, Any]]:
        """
        Run jobs and return their results in submission order.

        Args:
            jobs: Jobs to run
            job_fn: Picklable callable (module-level function or partial)

        Returns:
            One result dict per job
        """
        if self.max_workers == 1:
            results = [self.run_single(job, job_fn) for job in jobs]
        else:
            results: List[Optional[Dict[str, Any]]] = [None] * len(jobs)
            with concurrent.futures.ProcessPoolExecutor(max_workers=self.max_workers) as executor:
                futures = {executor.submit(self.run_single, job, job_fn): position
                           for position, job in enumerate(jobs)}
                for future in concurrent.futures.as_completed(futures):
                    position = futures[future]
                    try:
                        results[position] = future.result()
                    except Exception as e:
                        results[position] = {'key': jobs[position].key, 'success': False, 'error': str(e)}

        failed = [r for r in results if not r['success']]
        if failed:
            logger.warning(f"{len(failed)} of {len(jobs)} jobs failed")
        self.results = results
        return results

    def results_to_dataframe(self) -> pd.DataFrame:
        """Successful results as rows; nested values are left out."""
        rows = []
        for result in self.results:
            if result.get('success', False):
                rows.append({k: v for k, v in result.items()
                             if k not in ('key', 'success') and not isinstance(v, (dict, list))})
        return pd.DataFrame(rows)
