"""
Services package for fpcount: sieving, semigroups, counting and exponential sums
"""
