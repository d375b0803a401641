# scripts/init_run_store.py
"""
Create the run store tables and report what is stored
"""
import logging
import os
import sys

from sqlalchemy import inspect

# Add the project root to the Python path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from app.config.logging_config import configure_logging  # noqa: E402
from app.database.crud import SimulationRunCRUD  # noqa: E402
from app.database.database import get_engine, new_session  # noqa: E402

logger = logging.getLogger("init_run_store")


def init_run_store() -> bool:
    configure_logging("INFO")
    try:
        engine = get_engine()
        tables = inspect(engine).get_table_names()
        logger.info(f"[OK] Tables present: {', '.join(tables)}")
        db = new_session()
        try:
            runs = SimulationRunCRUD.get_runs(db, limit=1000)
            logger.info(f"[OK] {len(runs)} stored simulation runs")
        finally:
            db.close()
        return True
    except Exception as e:
        logger.error(f"[ERROR] Run store initialization failed: {e}")
        return False


if __name__ == "__main__":
    sys.exit(0 if init_run_store() else 1)
