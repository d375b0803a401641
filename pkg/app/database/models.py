# app/database/models.py
from datetime import datetime

from sqlalchemy import JSON, Column, DateTime, Float, Integer, String
from sqlalchemy.orm import declarative_base

Base = declarative_base()


class SimulationRun(Base):
    __tablename__ = "simulation_runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String(50), nullable=False, index=True)  # mc, mc-all, quantum, superdet
    relation = Column(String(10), index=True)
    seed = Column(String(40))  # seeds can exceed 64-bit integer columns
    seed_path = Column(JSON)
    n = Column(Integer, nullable=False)
    p_minus = Column(Float)
    generator = Column(String(50))
    chunk_size = Column(Integer)
    counts = Column(JSON, nullable=False)
    draws = Column(JSON)
    case_b_fraction = Column(Float)
    created_at = Column(DateTime, default=datetime.utcnow, index=True)

    def to_dict(self):
        return {
            "id": self.id,
            "command": self.command,
            "relation": self.relation,
            "seed": int(self.seed) if self.seed is not None else None,
            "seed_path": self.seed_path or [],
            "n": self.n,
            "p_minus": self.p_minus,
            "generator": self.generator,
            "chunk_size": self.chunk_size,
            "counts": self.counts,
            "draws": self.draws,
            "case_b_fraction": self.case_b_fraction,
            "created_at": self.created_at.isoformat() if self.created_at else None,
        }
