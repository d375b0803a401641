# app/database/database.py
import logging
from typing import Iterator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

from app.config.mermin_config import STORE_CONFIG
from app.database.models import Base

logger = logging.getLogger(__name__)

_engine: Optional[Engine] = None
SessionLocal = sessionmaker(autocommit=False, autoflush=False)


def configure_engine(database_url: Optional[str] = None) -> Engine:
    """(Re)bind the run store to database_url, creating tables on first use."""
    global _engine
    url = database_url or STORE_CONFIG["database_url"]
    if _engine is not None:
        _engine.dispose()
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    _engine = create_engine(url, echo=STORE_CONFIG["echo"], pool_pre_ping=True, connect_args=connect_args)
    SessionLocal.configure(bind=_engine)
    logger.info(f"[OK] Run store engine created for {_engine.url.render_as_string(hide_password=True)}")
    create_tables()
    return _engine


def get_engine() -> Engine:
    if _engine is None:
        configure_engine()
    return _engine


def create_tables() -> None:
    """Create all tables in the database."""
    try:
        Base.metadata.create_all(bind=get_engine())
        logger.info("[OK] Run store tables ready")
    except Exception as e:
        logger.error(f"[ERROR] Error creating tables: {e}")
        raise


def new_session() -> Session:
    get_engine()
    return SessionLocal()


def get_db() -> Iterator[Session]:
    """Dependency to get database session."""
    db = new_session()
    try:
        yield db
    finally:
        db.close()
