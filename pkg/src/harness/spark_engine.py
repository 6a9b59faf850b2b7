"""
PySpark execution engine for frame batches.

Each batch of frames is parallelized as an RDD and collected in order, so
the aggregated counts match the in-process engine exactly.
"""

import logging
import os
from pathlib import Path
from typing import Callable, List, Sequence

from pyspark.sql import SparkSession

logger = logging.getLogger(__name__)

REPO_ROOT = str(Path(__file__).resolve().parents[2])


class SparkEngine:
    """Runs work items on a Spark session."""

    def __init__(self, master: str = "local[*]", app_name: str = "CpmDetectionSweep"):
        self.spark = SparkSession.builder \
            .appName(app_name) \
            .master(master) \
            .config("spark.executorEnv.PYTHONPATH", os.pathsep.join(filter(None, [REPO_ROOT, os.environ.get("PYTHONPATH")]))) \
            .config("spark.ui.showConsoleProgress", "false") \
            .getOrCreate()
        self.sc = self.spark.sparkContext
        logger.info(f"Spark session started on {master} ({self.sc.defaultParallelism} slots)")

    def map(self, func: Callable, items: Sequence) -> List:
        items = list(items)
        if not items:
            return []
        return self.sc.parallelize(items, min(len(items), self.sc.defaultParallelism)).map(func).collect()

    def stop(self):
        self.spark.stop()
