"""
Serrin Vortex Package

Ähnlichkeitslösungen für Wirbel mit Geschwindigkeitsabfall r^(-b).
"""

__version__ = "1.0.0"
__author__ = "Silvan"

SCHEMA_VERSION = 1
