"""
Services package initialization
"""
from src.services.suite_service import SuiteService
from src.services.search_service import search_rastegin_violation

__all__ = ['SuiteService', 'search_rastegin_violation']
