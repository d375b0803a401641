# app/api/main.py - HTTP surface over the simulation and analysis services
import asyncio
import logging
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from sqlalchemy.orm import Session

from app.config.logging_config import configure_logging
from app.config.mermin_config import API_CONFIG
from app.core.core_types import PAIR_LABELS
from app.database.crud import SimulationRunCRUD
from app.database.database import get_db
from app.schemas.reports import TallyTable
from app.schemas.requests import BellRequest, HullRequest, McRunRequest, QuantumRunRequest, RecoverRequest
from app.services.analysis_service import HullQuery, analysis_service
from app.services.lad_monte_carlo_service import lad_monte_carlo_service
from app.services.local_realism_service import SetDistribution, local_realism_service
from app.services.quantum_model_service import OUTCOMES, JointOutcome, quantum_model_service
from app.services.realm_matrix_service import realm_matrix_service
from app.services.report_service import report_service

configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(title="Mermin Device Simulator", version="1.0.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=API_CONFIG["cors_origins"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _bad_request(e: ValueError) -> HTTPException:
    logger.warning(f"[WARN] Rejected request: {e}")
    return HTTPException(status_code=400, detail=str(e))


@app.get("/health")
async def health_check():
    return {"status": "healthy", "service": "mermin-simulator", "version": "1.0.0"}


@app.get("/realm")
async def realm():
    """Table 1: the four G9 vectors over the nine setting pairs."""
    m = realm_matrix_service.matrix
    return {
        "status": "success",
        "pairs": list(PAIR_LABELS),
        "columns": m.to_dict(),
        "instruction_sets": {col.label: [s.label for s in col.sources] for col in m.columns},
    }


@app.get("/relations")
async def relations():
    return {
        "status": "success",
        "relations": [r.to_dict() for r in realm_matrix_service.relations],
        "excluded_row_pairs": [list(rows) for rows in realm_matrix_service.excluded_row_pairs()],
    }


@app.get("/quantum/probability")
async def quantum_probability(outcome: str, theta: float):
    try:
        joint = JointOutcome.parse(outcome)
        value = quantum_model_service.joint_probability(joint, int(theta) if float(theta).is_integer() else theta)
        return {"status": "success", "outcome": str(joint), "theta": theta, "probability": str(value),
                "probability_float": float(value)}
    except ValueError as e:
        raise _bad_request(e)


@app.post("/quantum/run")
async def quantum_run(request: QuantumRunRequest):
    try:
        report = await asyncio.to_thread(
            quantum_model_service.run_quantum_experiment, request.n_trials, request.policy, request.seed,
        )
        return {"status": "success", "report": report.model_dump()}
    except ValueError as e:
        raise _bad_request(e)


@app.post("/bell")
async def bell(request: BellRequest):
    """Table 2 and the Bell bound for an instruction-set mixture."""
    try:
        d = SetDistribution.from_literal(request.distribution)
        result = {
            "status": "success",
            "distribution": d.to_dict(),
            "per_pair_fractions": dict(zip(PAIR_LABELS, (str(f) for f in local_realism_service.mixture_per_pair_fractions(d)))),
            "case_b_fraction": str(local_realism_service.mixture_case_b_fraction(d)),
            "enumeration": {k: str(v) for k, v in local_realism_service.bell_enumeration().items()},
        }
        if request.n_trials:
            report = await asyncio.to_thread(
                local_realism_service.simulate_instruction_sets, d, request.n_trials, request.seed,
            )
            result["simulation"] = report.model_dump()
        return result
    except ValueError as e:
        raise _bad_request(e)


@app.get("/superdet")
async def superdet(n_trials: Optional[int] = None, seed: Optional[int] = None):
    try:
        scenario = local_realism_service.build_superdet_scenario()
        result = {"status": "success", "scenario": scenario.to_dict()}
        if n_trials:
            report = await asyncio.to_thread(local_realism_service.simulate_superdet, scenario, n_trials, seed)
            result["simulation"] = report.model_dump()
            result["independence_gap"] = local_realism_service.statistical_independence_gap(report)
        return result
    except ValueError as e:
        raise _bad_request(e)


@app.post("/mc")
async def monte_carlo(request: McRunRequest, db: Session = Depends(get_db)):
    """Table 3: one functional relation's -1 tallies, optionally stored."""
    try:
        tally = await asyncio.to_thread(lad_monte_carlo_service.run_simulation, request)
        result = {
            "status": "success",
            "tally": tally.model_dump(),
            "case_b_fraction": str(lad_monte_carlo_service.case_b_same_fraction(tally)),
            "recovered": analysis_service.recover_distribution(tally).by_label(),
        }
        if request.store:
            result["run_id"] = SimulationRunCRUD.create_from_tally(db, tally).id
        return result
    except ValueError as e:
        raise _bad_request(e)


@app.post("/recover")
async def recover(request: RecoverRequest):
    try:
        tally = TallyTable(relation=request.relation, n_vectors=request.n_vectors or request.counts[0],
                           counts=request.counts)
        d = analysis_service.recover_distribution(tally)
        return {
            "status": "success",
            "distribution": d.by_label(),
            "same_different": analysis_service.same_different_ratio(d).to_dict(),
            "decomposition": analysis_service.decompose_case_b_fraction(d).to_dict(),
        }
    except ValueError as e:
        raise _bad_request(e)


@app.post("/hull")
async def hull(request: HullRequest):
    try:
        if request.uniform_b is not None:
            query = HullQuery.uniform_case_b(request.uniform_b)
        elif request.target is not None:
            query = HullQuery(tuple(request.target))
        else:
            query = HullQuery.from_expectations(request.expectations)
        verdict = analysis_service.hull_membership(query)
        return {"status": "success", "verdict": verdict.to_dict(), "summary": verdict.summary()}
    except ValueError as e:
        raise _bad_request(e)


@app.get("/report")
async def report(seed: Optional[int] = None, n: Optional[int] = None):
    try:
        consolidated = await report_service.build_report(seed, n)
        return {"status": "success", "report": consolidated.to_dict()}
    except ValueError as e:
        raise _bad_request(e)
    except Exception as e:
        logger.error(f"[ERROR] Report failed: {e}")
        raise HTTPException(status_code=500, detail=f"Report failed: {str(e)}")


@app.get("/runs")
async def list_runs(relation: Optional[str] = None, limit: int = 100, db: Session = Depends(get_db)):
    runs = SimulationRunCRUD.get_runs(db, relation=relation, limit=limit)
    return {"status": "success", "runs": [r.to_dict() for r in runs]}


@app.get("/runs/{run_id}")
async def get_run(run_id: int, db: Session = Depends(get_db)):
    run = SimulationRunCRUD.get_run(db, run_id)
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return {"status": "success", "run": run.to_dict()}


@app.delete("/runs/{run_id}")
async def delete_run(run_id: int, db: Session = Depends(get_db)):
    if not SimulationRunCRUD.delete_run(db, run_id):
        raise HTTPException(status_code=404, detail="Run not found")
    return {"status": "success", "deleted": run_id}
