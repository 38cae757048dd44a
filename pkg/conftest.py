import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'FredholmLab.settings')
django.setup()
