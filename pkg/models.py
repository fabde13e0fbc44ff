"""
Database models for the run ledger.

This module defines the SQLAlchemy models for:
- Runs: one command invocation with its configuration hash and outcome
- Artifacts: the files a run wrote, with their checksums

Timestamps live only here so that the CSV/JSON artifacts themselves stay
byte-identical between repeated runs.
"""

import logging
import os
from datetime import datetime

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, relationship, sessionmaker

logger = logging.getLogger(__name__)

Base = declarative_base()


class RunRecord(Base):
    """
    Run model representing one command invocation.

    Attributes:
        id (int): Primary key
        command (str): Subcommand name (levelset, homoclinic, ...)
        config_hash (str): SHA-256 of the canonical run configuration
        version (str): Package version that produced the run
        p (float): Exponent, when the run has a single one
        status (str): running, completed or failed
        exit_code (int): Process exit code
        message (str): Error message for failed runs
        created_at (datetime): Start timestamp
        finished_at (datetime): End timestamp
        artifacts (relationship): Files written by the run
    """

    __tablename__ = 'run'

    id = Column(Integer, primary_key=True)
    command = Column(String(50), nullable=False)
    config_hash = Column(String(64), nullable=False)
    version = Column(String(20))
    p = Column(Float)
    status = Column(String(20), default='running')
    exit_code = Column(Integer)
    message = Column(Text)
    out_dir = Column(Text)
    created_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime)

    artifacts = relationship('ArtifactRecord', back_populates='run', cascade='all, delete-orphan', lazy=True)

    @property
    def duration(self):
        if self.created_at and self.finished_at:
            return (self.finished_at - self.created_at).total_seconds()
        return None

    def to_dict(self):
        """Convert run to dictionary for JSON serialization"""
        return {
            'id': self.id,
            'command': self.command,
            'config_hash': self.config_hash,
            'version': self.version,
            'p': self.p,
            'status': self.status,
            'exit_code': self.exit_code,
            'message': self.message,
            'out_dir': self.out_dir,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'finished_at': self.finished_at.isoformat() if self.finished_at else None,
            'duration': self.duration,
            'artifact_count': len(self.artifacts),
        }


class ArtifactRecord(Base):
    """Model for a file written by a run"""

    __tablename__ = 'artifact'

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('run.id'), nullable=False)
    path = Column(Text, nullable=False)
    kind = Column(String(10))  # csv, json or svg
    sha256 = Column(String(64))
    size = Column(Integer)

    run = relationship('RunRecord', back_populates='artifacts')

    def to_dict(self):
        return {
            'id': self.id,
            'run_id': self.run_id,
            'path': self.path,
            'kind': self.kind,
            'sha256': self.sha256,
            'size': self.size,
        }


def init_db(database_url):
    """Create the tables if needed and return a session factory bound to database_url."""
    if database_url.startswith('sqlite:///'):
        folder = os.path.dirname(os.path.abspath(database_url[len('sqlite:///'):]))
        os.makedirs(folder, exist_ok=True)
    engine = create_engine(database_url)
    Base.metadata.create_all(engine)
    logger.debug(f"Run ledger ready at {database_url}")
    return sessionmaker(bind=engine)
