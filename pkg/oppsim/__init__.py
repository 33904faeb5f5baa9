#
version = '0.3.0'
release = version + 'alpha'
