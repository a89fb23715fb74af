"""
Numerical utilities: hermitian core and seeded random streams
"""
