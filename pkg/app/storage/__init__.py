"""Storage package initialization."""
from app.storage.artifact_store import ArtifactStore, artifact_store

__all__ = ['ArtifactStore', 'artifact_store']
