"""cloudsift: forensic triage of cloud-storage client residue on smartphones."""

__version__ = "1.0.0"
