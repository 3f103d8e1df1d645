"""
DoS attack classification from SNMP-MIB ICMP counters
"""

__version__ = "1.0.0"
