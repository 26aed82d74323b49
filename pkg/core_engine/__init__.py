"""
Core engine for reaction-network integral control.
Pure Python - NO Django imports allowed.
"""
