# app/database/crud.py
from typing import Any, Dict, List, Optional

from sqlalchemy import desc
from sqlalchemy.orm import Session

from app.database.models import SimulationRun
from app.schemas.reports import FactsReport, TallyTable
from app.services.lad_monte_carlo_service import lad_monte_carlo_service


class SimulationRunCRUD:
    @staticmethod
    def create_run(db: Session, run_data: Dict[str, Any]) -> SimulationRun:
        """Store one simulation run."""
        run_data = dict(run_data)
        if run_data.get("seed") is not None:
            run_data["seed"] = str(run_data["seed"])
        db_run = SimulationRun(**run_data)
        db.add(db_run)
        db.commit()
        db.refresh(db_run)
        return db_run

    @staticmethod
    def create_from_tally(db: Session, t: TallyTable, command: str = "mc") -> SimulationRun:
        return SimulationRunCRUD.create_run(db, {
            "command": command,
            "relation": t.relation,
            "seed": t.seed,
            "seed_path": list(t.seed_path),
            "n": t.n_vectors,
            "p_minus": t.p_minus,
            "generator": t.generator,
            "chunk_size": t.chunk_size,
            "counts": t.as_dict(),
            "draws": dict(t.column_draws or {}),
            "case_b_fraction": float(lad_monte_carlo_service.case_b_same_fraction(t)),
        })

    @staticmethod
    def create_from_facts(db: Session, report: FactsReport) -> SimulationRun:
        return SimulationRunCRUD.create_run(db, {
            "command": report.source,
            "seed": report.seed,
            "n": report.n_trials,
            "generator": report.generator,
            "chunk_size": report.chunk_size,
            "counts": {t.pair: [t.rr, t.rg, t.gr, t.gg] for t in report.pairs},
            "case_b_fraction": report.case_b_same_fraction,
        })

    @staticmethod
    def get_run(db: Session, run_id: int) -> Optional[SimulationRun]:
        return db.query(SimulationRun).filter(SimulationRun.id == run_id).first()

    @staticmethod
    def get_runs(db: Session, relation: Optional[str] = None, skip: int = 0, limit: int = 100) -> List[SimulationRun]:
        """Stored runs, newest first."""
        query = db.query(SimulationRun)
        if relation is not None:
            query = query.filter(SimulationRun.relation == relation)
        return query.order_by(desc(SimulationRun.created_at), desc(SimulationRun.id)).offset(skip).limit(limit).all()

    @staticmethod
    def delete_run(db: Session, run_id: int) -> bool:
        db_run = db.query(SimulationRun).filter(SimulationRun.id == run_id).first()
        if db_run:
            db.delete(db_run)
            db.commit()
            return True
        return False
