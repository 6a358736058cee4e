"""
Regularized multi-task feature learning of regional case fatality
rates
"""
__version__ = '0.1.0'
