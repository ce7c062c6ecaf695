from sqlalchemy import (
    create_engine, Column, Integer, Text, Float, ForeignKey, DateTime, JSON, Index, UniqueConstraint
)
from sqlalchemy.orm import relationship, sessionmaker, declarative_base
from sqlalchemy.pool import StaticPool
from sqlalchemy.sql import func
from constants import DATABASE_URL


def _engine_options(url):
    # in-memory SQLite must share one connection or every session sees an empty database
    if url in ("sqlite://", "sqlite:///:memory:"):
        return {"poolclass": StaticPool, "connect_args": {"check_same_thread": False}}
    return {}


engine = create_engine(DATABASE_URL, echo=False, **_engine_options(DATABASE_URL))
Session = sessionmaker(bind=engine)

Base = declarative_base()

# ----------------------------
# Decomposition runs
# ----------------------------

class DecompositionRun(Base):
    __tablename__ = "decomposition_run"
    id = Column(Integer, primary_key=True)
    created_at = Column(DateTime, server_default=func.now())
    source = Column(Text)
    n_samples = Column(Integer, nullable=False)
    sample_rate = Column(Float)
    mode = Column(Text, nullable=False)                 # "known" / "blind"
    stop_reason = Column(Text, nullable=False)
    original_energy = Column(Float, nullable=False)
    residual_energy = Column(Float, nullable=False)
    config = Column(JSON, nullable=False, default=dict)
    diagnostics = Column(JSON, nullable=False, default=list)

    tones = relationship(
        "ExtractedTone",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="ExtractedTone.position",
    )

    __table_args__ = (
        Index("ix_run_created_at", "created_at"),
    )


class ExtractedTone(Base):
    __tablename__ = "extracted_tone"
    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("decomposition_run.id", ondelete="CASCADE"), nullable=False)
    position = Column(Integer, nullable=False)          # extraction order
    frequency = Column(Float, nullable=False)           # rad/sample
    amplitude = Column(Float, nullable=False)
    phase = Column(Float, nullable=False)               # rad, (-pi, pi]

    run = relationship("DecompositionRun", back_populates="tones")

    __table_args__ = (
        UniqueConstraint("run_id", "position", name="uq_tone_position_per_run"),
        Index("ix_tone_run", "run_id"),
    )


Base.metadata.create_all(bind=engine)
