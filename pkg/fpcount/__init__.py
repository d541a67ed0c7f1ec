"""
fpcount - prime powers and the two-generator Frobenius problem
"""
__version__ = "1.0.0"
