"""
Numerical and file helpers
"""
