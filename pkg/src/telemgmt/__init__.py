"""Tele-management platform: continuous vital-sign tele-monitoring plus
session-based tele-consultation, with the reliability/availability and
survey evaluation tooling needed to assess a deployment.

Everything runs on a single machine with simulated sensors; see the
``telemgmt`` CLI (serve / simulate / probe / report).
"""

__version__ = "0.1.0"
