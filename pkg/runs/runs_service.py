import logging

from sqlalchemy.orm import selectinload

from db import Session, DecompositionRun, ExtractedTone
from decomposer.decomposer_utilities import DecomposerUtilities
from models import TWO_PI


logger = logging.getLogger(__name__)


class RunsService:
    def __init__(self):
        self.utils = DecomposerUtilities()


    def get_run_return_dict(self, run, include_tones=True):
        payload = {
            "id": run.id,
            "created_at": run.created_at.isoformat() if run.created_at else None,
            "source": run.source,
            "n_samples": run.n_samples,
            "sample_rate": run.sample_rate,
            "mode": run.mode,
            "stop_reason": run.stop_reason,
            "original_energy": run.original_energy,
            "residual_energy": run.residual_energy,
            "tone_count": len(run.tones),
        }
        if include_tones:
            payload["config"] = run.config
            payload["diagnostics"] = run.diagnostics
            payload["tones"] = [
                {
                    "position": t.position,
                    "frequency_rad_per_sample": t.frequency,
                    "amplitude": t.amplitude,
                    "phase_rad": t.phase,
                    **({"frequency_hz": t.frequency * run.sample_rate / TWO_PI} if run.sample_rate else {}),
                }
                for t in run.tones
            ]
        return payload


    def save_run(self, result, cfg, sample_rate=None, source=None):
        session = Session()
        try:
            document = self.utils.result_to_document(result, cfg, sample_rate=sample_rate, source=source)
            run = DecompositionRun(
                source=source,
                n_samples=document["n_samples"],
                sample_rate=sample_rate,
                mode=cfg.mode,
                stop_reason=result.stop_reason,
                original_energy=result.original_energy,
                residual_energy=result.residual_energy,
                config=document["config"],
                diagnostics=document["diagnostics"],
            )
            run.tones = [
                ExtractedTone(position=i, frequency=t.frequency, amplitude=t.amplitude, phase=t.phase)
                for i, t in enumerate(result.tones)
            ]
            session.add(run)
            session.commit()
            session.refresh(run)
            return self.get_run_return_dict(run)
        except Exception as e:
            session.rollback()
            logger.error("Error saving decomposition run: %s", e)
            raise
        finally:
            session.close()


    def get_all_runs(self):
        session = Session()
        try:
            runs = (
                session.query(DecompositionRun)
                .options(selectinload(DecompositionRun.tones))
                .order_by(DecompositionRun.id)
                .all()
            )
            return [self.get_run_return_dict(r, include_tones=False) for r in runs]
        finally:
            session.close()


    def get_run(self, run_id):
        session = Session()
        try:
            run = session.get(DecompositionRun, run_id)
            if run is None:
                return None
            return self.get_run_return_dict(run)
        finally:
            session.close()


    def delete_run(self, run_id):
        session = Session()
        try:
            run = session.get(DecompositionRun, run_id)
            if run is None:
                return False
            session.delete(run)
            session.commit()
            return True
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()
