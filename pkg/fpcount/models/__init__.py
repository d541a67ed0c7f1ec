"""
Models package for fpcount reports and sweep configuration
"""
